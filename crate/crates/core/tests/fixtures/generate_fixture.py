"""Writes wid_fixture.csv: 3 countries x 10 years of WID-style long data.

Known holes and edge cases:
  AAA  complete, same-year PPP factors, f around 4%
  BBB  f above 10%, capital falls in 2005 (negative net profit),
       PPP factor only for 2009
  CCC  mnweal missing for 2005, pay above consumption in 2008
"""
import random

rng = random.Random(7)
YEARS = range(2000, 2010)


def jitter(scale):
    return rng.uniform(-scale, scale)


def one(x):
    return f"{x:.1f}"


rows = []

k = 5000.0
for t, y in enumerate(YEARS):
    if t:
        k *= 1.03 + jitter(0.01)
    rows += [
        ("AAA", "mnweal999i", y, one(k)),
        ("AAA", "mcongo999i", y, one(180 + 3 * t + jitter(2))),
        ("AAA", "mconhn999i", y, one(720 + 12 * t + jitter(5))),
        ("AAA", "mnninc999i", y, one(1100 + 20 * t + jitter(6))),
        ("AAA", "wlabsh999i", y, f"{0.62 + jitter(0.01):.3f}"),
        ("AAA", "anninc992i", y, one(40000 + 800 * t + jitter(200))),
        ("AAA", "xlcusp999i", y, f"{0.9 + 0.01 * t:.3f}"),
    ]

k = 2000.0
for t, y in enumerate(YEARS):
    if t:
        k *= 0.85 if y == 2005 else 1.04 + jitter(0.01)
    rows += [
        ("BBB", "mnweal999i", y, one(k)),
        ("BBB", "mcongo999i", y, one(150 + 2 * t + jitter(2))),
        ("BBB", "mconhn999i", y, one(650 + 8 * t + jitter(4))),
        ("BBB", "mnninc999i", y, one(950 + 15 * t + jitter(5))),
        ("BBB", "wlabsh999i", y, f"{0.58 + jitter(0.01):.3f}"),
        ("BBB", "anninc992i", y, one(15000 + 300 * t + jitter(100))),
    ]
    if y == 2009:
        rows.append(("BBB", "xlcusp999i", y, "3.2"))

k = 1500.0
for t, y in enumerate(YEARS):
    if t:
        k *= 1.05 + jitter(0.01)
    if y != 2005:
        rows.append(("CCC", "mnweal999i", y, one(k)))
    rows += [
        ("CCC", "mcongo999i", y, one(60 + 1 * t + jitter(1))),
        ("CCC", "mconhn999i", y, one(340 + 7 * t + jitter(3))),
        ("CCC", "mnninc999i", y, one(520 + 10 * t + jitter(4))),
        ("CCC", "wlabsh999i", y, "0.850" if y == 2008 else f"{0.70 + jitter(0.01):.3f}"),
        ("CCC", "anninc992i", y, one(4000 + 100 * t + jitter(50))),
        ("CCC", "xlcusp999i", y, "1.5"),
    ]

with open("wid_fixture.csv", "w") as out:
    out.write("country;variable;percentile;year;value;age;pop\n")
    for country, var, year, value in rows:
        out.write(f"{country};{var};p0p100;{year};{value};999;i\n")

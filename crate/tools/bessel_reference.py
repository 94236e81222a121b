"""Regenerate the frozen J_n(x) reference table with mpmath (50 digits).

Usage: python3 tools/bessel_reference.py > crates/core/tests/data/bessel_reference.csv
"""
import mpmath as mp

mp.mp.dps = 50
ORDERS = [0, 1, 2, 3, 4, 5, 7, 10, 13, 20, 31, 50, 75, 100, 150, 200]
ARGS = [1e-3, 0.1, 0.5, 1, 2, 2.5, 5, 7.5, 10, 11.9, 12, 12.1, 15, 20, 25, 30,
        40, 50, 60, 75, 99.5, 100, 120, 150, 175, 199, 200]

print("n,x,j")
for n in ORDERS:
    for x in ARGS:
        v = mp.besselj(n, mp.mpf(x))
        if abs(v) < mp.mpf("1e-300"):
            continue
        print(f"{n},{mp.nstr(mp.mpf(x), 17)},{mp.nstr(v, 20)}")

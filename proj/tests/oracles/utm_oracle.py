#!/usr/bin/env python3
"""Freeze UTM reference values from PROJ (via pyproj) for the geodesy tests.

Writes tests/data/utm_oracle.csv. Zones use plain 6-degree zoning (no
Norway/Svalbard exceptions) to match the engine's zoning rule.
"""
import csv
import math
import pathlib
import random

import pyproj

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "utm_oracle.csv"


def zone_for(lon):
    return min(60, max(1, int(math.floor((lon + 180.0) / 6.0)) + 1))


def utm(lat, lon):
    zone = zone_for(lon)
    south = lat < 0
    proj = pyproj.Proj(proj="utm", zone=zone, south=south, ellps="WGS84")
    e, n = proj(lon, lat)
    return zone, ("S" if south else "N"), e, n


def main():
    rng = random.Random(20240517)
    rows = [
        ("fixed", 0.0, 3.0),
        ("fixed", 0.0, 0.0),
        ("fixed", 51.5007, -0.1246),
        ("fixed", -33.8568, 151.2153),
        ("fixed", 83.9, 179.99),
        ("fixed", -79.9, -179.99),
    ]
    for _ in range(100):
        rows.append(("random", rng.uniform(-79.999, 83.999), rng.uniform(-180.0, 179.999999)))
    with OUT.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "lat", "lon", "zone", "hemisphere", "easting", "northing"])
        for kind, lat, lon in rows:
            zone, hemi, e, n = utm(lat, lon)
            w.writerow([kind, repr(lat), repr(lon), zone, hemi, f"{e:.6f}", f"{n:.6f}"])


if __name__ == "__main__":
    main()

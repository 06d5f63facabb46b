#!/usr/bin/env python3
"""Regenerates data/us_backbone.txt.

39 North American metro nodes projected to planar km; links are the union of
each node's three nearest neighbours, topped up with the shortest remaining
city pairs until the link count reaches 122. Fidelities are drawn from
N(0.8, 0.1) clamped to [0.5, 0.99].
"""
import math
import random
import sys

CITIES = [
    ("Seattle", 47.61, -122.33), ("Portland", 45.52, -122.68),
    ("SanFrancisco", 37.77, -122.42), ("LosAngeles", 34.05, -118.24),
    ("SanDiego", 32.72, -117.16), ("LasVegas", 36.17, -115.14),
    ("Phoenix", 33.45, -112.07), ("SaltLakeCity", 40.76, -111.89),
    ("Denver", 39.74, -104.99), ("Albuquerque", 35.08, -106.65),
    ("ElPaso", 31.76, -106.49), ("Dallas", 32.78, -96.80),
    ("Houston", 29.76, -95.37), ("SanAntonio", 29.42, -98.49),
    ("OklahomaCity", 35.47, -97.52), ("KansasCity", 39.10, -94.58),
    ("Omaha", 41.26, -95.93), ("Minneapolis", 44.98, -93.27),
    ("Chicago", 41.88, -87.63), ("StLouis", 38.63, -90.20),
    ("Memphis", 35.15, -90.05), ("NewOrleans", 29.95, -90.07),
    ("Nashville", 36.16, -86.78), ("Atlanta", 33.75, -84.39),
    ("Miami", 25.76, -80.19), ("Tampa", 27.95, -82.46),
    ("Charlotte", 35.23, -80.84), ("Washington", 38.91, -77.04),
    ("Philadelphia", 39.95, -75.17), ("NewYork", 40.71, -74.01),
    ("Boston", 42.36, -71.06), ("Pittsburgh", 40.44, -79.99),
    ("Cleveland", 41.50, -81.69), ("Detroit", 42.33, -83.05),
    ("Indianapolis", 39.77, -86.16), ("Toronto", 43.65, -79.38),
    ("Montreal", 45.50, -73.57), ("Vancouver", 49.28, -123.12),
    ("Calgary", 51.05, -114.07),
]
LINKS = 122
CAPACITY = 50


def main(out_path):
    lat0 = math.radians(40.0)
    lon_min = min(c[2] for c in CITIES)
    lat_min = min(c[1] for c in CITIES)
    pts = [((lon - lon_min) * 111.32 * math.cos(lat0), (lat - lat_min) * 110.57)
           for _, lat, lon in CITIES]
    n = len(pts)
    dist = lambda a, b: math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])
    links = set()
    for a in range(n):
        near = sorted((dist(a, b), b) for b in range(n) if b != a)[:3]
        for _, b in near:
            links.add((min(a, b), max(a, b)))
    rest = sorted((dist(a, b), a, b) for a in range(n) for b in range(a + 1, n)
                  if (a, b) not in links)
    for _, a, b in rest:
        if len(links) >= LINKS:
            break
        links.add((a, b))
    rng = random.Random(20230501)
    with open(out_path, "w") as f:
        f.write("# US/Canada backbone-style topology: %d nodes, %d links\n" % (n, len(links)))
        f.write("# N <id> <x_km> <y_km>\n# E <u> <v> <capacity> <fidelity>\n")
        for i, (name, _, _) in enumerate(CITIES):
            f.write("N %d %.3f %.3f  # %s\n" % (i, pts[i][0], pts[i][1], name))
        for a, b in sorted(links):
            fid = min(0.99, max(0.5, rng.gauss(0.8, 0.1)))
            f.write("E %d %d %d %.6f\n" % (a, b, CAPACITY, fid))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/us_backbone.txt")

#!/usr/bin/env python3
import csv
import sys

rows = list(csv.reader(open(sys.argv[1], newline="")))
w = csv.writer(sys.stdout, lineterminator="\n")
w.writerow(["d_" + h for h in rows[0]])
for r in rows[1:-1]:
    w.writerow([repr(2 * float(x)) for x in r])

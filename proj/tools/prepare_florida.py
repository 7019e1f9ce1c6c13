#!/usr/bin/env python3
"""Project the public compas-scores-two-years.csv onto the columns of the `florida` profile.

Usage: prepare_florida.py <compas-scores-two-years.csv> <out.csv>
"""
import csv
import sys

COLUMNS = ["age", "juv_fel_count", "juv_misd_count", "priors_count", "sex", "c_charge_degree", "two_year_recid"]


def main(src, dst):
    with open(src, newline="") as fin, open(dst, "w", newline="") as fout:
        reader = csv.DictReader(fin)
        missing = [c for c in COLUMNS if c not in reader.fieldnames]
        if missing:
            sys.exit(f"input lacks columns: {', '.join(missing)}")
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in reader:
            writer.writerow([row[c] for c in COLUMNS])


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])

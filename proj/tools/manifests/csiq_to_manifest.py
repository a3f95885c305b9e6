#!/usr/bin/env python3
"""Convert CSIQ metadata to a curviqa manifest.

Reads the DMOS table either from the distribution's csiq.DMOS.xlsx (needs
pandas + openpyxl) or from a CSV export of that sheet with columns
image, dst_type, dst_lev, dmos. Degraded images are expected under
dst_imgs/<TYPE>/<image>.<TYPE>.<level>.png. DMOS is 0..1, lower is
better. The folder/type naming is configurable.
"""

import argparse
import csv
import os
import sys

# CSIQ spreadsheet type labels -> (class, folder name)
DEFAULT_TYPES = {
    "noise": ("wn", "awgn"),
    "awgn": ("wn", "awgn"),
    "blur": ("gblur", "blur"),
    "jpeg": ("jpeg", "jpeg"),
    "jpeg 2000": ("jp2k", "jpeg2000"),
    "jpeg2000": ("jp2k", "jpeg2000"),
}


def load_table(path: str):
    if path.lower().endswith(".csv"):
        with open(path, newline="") as f:
            for row in csv.DictReader(f):
                yield row
        return
    try:
        import pandas as pd
    except ImportError:
        sys.exit("reading the xlsx needs pandas + openpyxl; or pass a CSV export")
    frame = pd.read_excel(path, sheet_name="all_by_image")
    frame.columns = [str(c).strip().lower() for c in frame.columns]
    for _, row in frame.iterrows():
        yield {k: row[k] for k in frame.columns}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csiq_dir", help="CSIQ root (holds dst_imgs/)")
    parser.add_argument("dmos_table", help="csiq.DMOS.xlsx or a CSV export")
    parser.add_argument("out_csv", help="manifest to write")
    args = parser.parse_args()

    rows = []
    for record in load_table(args.dmos_table):
        dst_type = str(record["dst_type"]).strip().lower()
        if dst_type not in DEFAULT_TYPES:
            continue
        cls, folder = DEFAULT_TYPES[dst_type]
        image = str(record["image"]).strip()
        level = int(record["dst_lev"])
        dmos = float(record["dmos"])
        path = os.path.join(args.csiq_dir, "dst_imgs", folder,
                            f"{image}.{folder.upper()}.{level}.png")
        if not os.path.exists(path):
            sys.exit(f"missing image: {path}")
        rows.append([os.path.abspath(path), image, cls, dmos, 0.0, 1.0, "lower_better"])

    with open(args.out_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            "image_path,reference_id,distortion,score,score_min,score_max,polarity".split(",")
        )
        writer.writerows(rows)
    print(f"{len(rows)} records -> {args.out_csv}")


if __name__ == "__main__":
    main()

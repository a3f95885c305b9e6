#!/usr/bin/env python3
"""Convert the LIVE IQA release 2 metadata to a curviqa manifest.

Expects the databaserelease2 layout: jp2k/, jpeg/, wn/, gblur/ image
directories plus dmos.mat (or dmos_realigned.mat) and refnames_all.mat.
Originals (orgs flag set) are skipped. DMOS is 0..100, lower is better.
"""

import argparse
import csv
import os
import sys

try:
    import scipy.io
except ImportError:
    sys.exit("this script needs scipy (pip install scipy)")

# release-2 image order: jp2k, jpeg, wn, gblur, fastfading
SEGMENTS = [("jp2k", 227), ("jpeg", 233), ("wn", 174), ("gblur", 174)]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("live_dir", help="databaserelease2 directory")
    parser.add_argument("out_csv", help="manifest to write")
    parser.add_argument(
        "--realigned",
        action="store_true",
        help="use dmos_realigned.mat instead of dmos.mat",
    )
    args = parser.parse_args()

    mat_name = "dmos_realigned.mat" if args.realigned else "dmos.mat"
    dmos_mat = scipy.io.loadmat(os.path.join(args.live_dir, mat_name))
    key = "dmos_new" if args.realigned else "dmos"
    dmos = dmos_mat[key].ravel()
    orgs = dmos_mat["orgs"].ravel()
    refs = scipy.io.loadmat(os.path.join(args.live_dir, "refnames_all.mat"))[
        "refnames_all"
    ].ravel()

    rows = []
    index = 0
    for segment, count in SEGMENTS:
        for i in range(1, count + 1):
            if not orgs[index]:
                path = os.path.join(args.live_dir, segment, f"img{i}.bmp")
                if not os.path.exists(path):
                    sys.exit(f"missing image: {path}")
                rows.append(
                    [
                        os.path.abspath(path),
                        str(refs[index][0]),
                        segment,
                        float(dmos[index]),
                        0.0,
                        100.0,
                        "lower_better",
                    ]
                )
            index += 1
    index += 174  # skip the fastfading block entirely

    with open(args.out_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            "image_path,reference_id,distortion,score,score_min,score_max,polarity".split(",")
        )
        writer.writerows(rows)
    print(f"{len(rows)} records -> {args.out_csv}")


if __name__ == "__main__":
    main()

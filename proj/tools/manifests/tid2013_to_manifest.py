#!/usr/bin/env python3
"""Convert TID2013 metadata (mos_with_names.txt) to a curviqa manifest.

Keeps the 24 natural reference images (i25 is artificial and excluded)
and the four shared distortion classes. MOS is 0..9, higher is better.
The TID distortion-code mapping is configurable; the default matches the
published numbering: 1 = additive Gaussian noise, 8 = Gaussian blur,
10 = JPEG, 11 = JPEG2000.
"""

import argparse
import csv
import os
import sys

DEFAULT_MAP = {"wn": 1, "gblur": 8, "jpeg": 10, "jp2k": 11}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("tid_dir", help="tid2013 directory (holds mos_with_names.txt)")
    parser.add_argument("out_csv", help="manifest to write")
    parser.add_argument(
        "--map",
        nargs="*",
        default=[],
        metavar="CLASS=CODE",
        help="override the distortion-code mapping, e.g. wn=1 gblur=8",
    )
    parser.add_argument(
        "--images-subdir",
        default="distorted_images",
        help="directory holding the distorted images",
    )
    args = parser.parse_args()

    mapping = dict(DEFAULT_MAP)
    for item in args.map:
        cls, code = item.split("=")
        mapping[cls] = int(code)
    by_code = {code: cls for cls, code in mapping.items()}

    mos_path = os.path.join(args.tid_dir, "mos_with_names.txt")
    rows = []
    with open(mos_path) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            mos, name = float(parts[0]), parts[1]
            stem = os.path.splitext(name)[0].lower()  # iRR_TT_L
            ref, code, _level = stem.split("_")
            if ref == "i25":
                continue  # artificial reference
            if int(code) not in by_code:
                continue
            path = os.path.join(args.tid_dir, args.images_subdir, name)
            if not os.path.exists(path):
                # image names vary in case between mirrors
                alt = os.path.join(args.tid_dir, args.images_subdir, name.lower())
                if not os.path.exists(alt):
                    sys.exit(f"missing image: {path}")
                path = alt
            rows.append(
                [os.path.abspath(path), ref, by_code[int(code)], mos, 0.0, 9.0,
                 "higher_better"]
            )

    with open(args.out_csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            "image_path,reference_id,distortion,score,score_min,score_max,polarity".split(",")
        )
        writer.writerows(rows)
    print(f"{len(rows)} records -> {args.out_csv}")


if __name__ == "__main__":
    main()

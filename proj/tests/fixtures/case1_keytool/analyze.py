"""Enumerate attack-surface indicators in bootloader images."""

import argparse
import os

SURFACE_MARKERS = ("uefi", "grub", "uboot", "coreboot")


def scan_image(path):
    hits = []
    with open(path, "rb") as handle:
        blob = handle.read().lower()
    for marker in SURFACE_MARKERS:
        if marker.encode() in blob:
            hits.append(marker)
    return hits


def main():
    parser = argparse.ArgumentParser(description="bootloader attack-surface scan")
    parser.add_argument("--target", required=True, help="directory of bootloader images")
    args = parser.parse_args()
    for name in sorted(os.listdir(args.target)):
        hits = scan_image(os.path.join(args.target, name))
        print(name, ",".join(hits) or "none")


if __name__ == "__main__":
    main()

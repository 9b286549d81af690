#!/usr/bin/env python3
"""Write JPEG fixtures with EXIF produced by reference writers.

gps_be.jpg      piexif (big-endian "MM" TIFF header), full GPS + 35mm focal
gps_le.jpg      Pillow (little-endian "II"), GPS south/east, FocalLength only
exif_no_gps.jpg Pillow, IFD0 orientation only
no_exif.jpg     Pillow, no APP1 segment
expected.json   the values each writer was asked to store
"""
import io
import json
import pathlib

import piexif
from PIL import Image

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "exif"


def blank(w, h, color):
    return Image.new("RGB", (w, h), color)


def write_piexif():
    exif = {
        "0th": {piexif.ImageIFD.Orientation: 1},
        "Exif": {
            piexif.ExifIFD.DateTimeOriginal: b"2024:05:17 14:03:22",
            piexif.ExifIFD.FocalLengthIn35mmFilm: 28,
            piexif.ExifIFD.FocalLength: (425, 100),
            piexif.ExifIFD.PixelXDimension: 64,
            piexif.ExifIFD.PixelYDimension: 48,
        },
        "GPS": {
            piexif.GPSIFD.GPSLatitudeRef: b"N",
            piexif.GPSIFD.GPSLatitude: ((51, 1), (24, 1), (0, 1)),
            piexif.GPSIFD.GPSLongitudeRef: b"W",
            piexif.GPSIFD.GPSLongitude: ((0, 1), (12, 1), (0, 1)),
            piexif.GPSIFD.GPSAltitudeRef: 0,
            piexif.GPSIFD.GPSAltitude: (355, 10),
            piexif.GPSIFD.GPSImgDirectionRef: b"T",
            piexif.GPSIFD.GPSImgDirection: (1235, 10),
        },
    }
    buf = io.BytesIO()
    blank(64, 48, (120, 80, 40)).save(buf, "jpeg", exif=piexif.dump(exif))
    (OUT / "gps_be.jpg").write_bytes(buf.getvalue())
    return {
        "lat": 51.4,
        "lon": -0.2,
        "alt": 35.5,
        "heading": 123.5,
        "timestamp": "2024-05-17T14:03:22Z",
        "focal35": 28,
        "focal35_unscaled": False,
        "orientation": 1,
        "width": 64,
        "height": 48,
        "byte_order": "MM",
    }


def write_pillow():
    img = blank(80, 60, (10, 200, 30))
    exif = img.getexif()
    exif.endian = "<"
    exif[0x0112] = 6  # Orientation: rotate 90 CW for display
    exif_ifd = exif.get_ifd(0x8769)
    exif_ifd[0x9003] = "2023:11:02 08:15:00"
    exif_ifd[0x920A] = 4.25
    gps = exif.get_ifd(0x8825)
    gps[1] = "S"
    gps[2] = (33.0, 51.0, 24.48)
    gps[3] = "E"
    gps[4] = (151.0, 12.0, 55.08)
    gps[5] = b"\x01"
    gps[6] = 2.0
    buf = io.BytesIO()
    img.save(buf, "jpeg", exif=exif.tobytes())
    (OUT / "gps_le.jpg").write_bytes(buf.getvalue())
    return {
        "lat": -(33 + 51 / 60 + 24.48 / 3600),
        "lon": 151 + 12 / 60 + 55.08 / 3600,
        "alt": -2.0,
        "timestamp": "2023-11-02T08:15:00Z",
        "focal35": 4.25,
        "focal35_unscaled": True,
        "orientation": 6,
        # stored 80x60, displayed rotated
        "width": 60,
        "height": 80,
        "byte_order": "II",
    }


def write_no_gps():
    img = blank(32, 32, (0, 0, 0))
    exif = img.getexif()
    exif[0x0112] = 1
    buf = io.BytesIO()
    img.save(buf, "jpeg", exif=exif.tobytes())
    (OUT / "exif_no_gps.jpg").write_bytes(buf.getvalue())


def write_no_exif():
    buf = io.BytesIO()
    blank(16, 8, (255, 255, 255)).save(buf, "jpeg")
    (OUT / "no_exif.jpg").write_bytes(buf.getvalue())


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    expected = {"gps_be.jpg": write_piexif(), "gps_le.jpg": write_pillow()}
    write_no_gps()
    write_no_exif()
    (OUT / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Convert YOLO (ultralytics / darknet) label files to an ave detection file.

Input is the text format written by `yolo predict save_txt=True save_conf=True`:
one line per box, `class cx cy w h [conf] [track_id]`, coordinates normalised
to the image size. Class indices are mapped through a names file (one name
per line, COCO order by default for the bundled list).

    yolo_to_ave.py --names coco.names --image img_a.jpg labels/img_a.txt > det.json
    yolo_to_ave.py --size 4000x3000 --image-id img_a labels/img_a.txt
"""

import argparse
import json
import sys
from pathlib import Path

COCO = (
    "person bicycle car motorcycle airplane bus train truck boat traffic_light fire_hydrant stop_sign "
    "parking_meter bench bird cat dog horse sheep cow elephant bear zebra giraffe backpack umbrella handbag "
    "tie suitcase frisbee skis snowboard sports_ball kite baseball_bat baseball_glove skateboard surfboard "
    "tennis_racket bottle wine_glass cup fork knife spoon bowl banana apple sandwich orange broccoli carrot "
    "hot_dog pizza donut cake chair couch potted_plant bed dining_table toilet tv laptop mouse remote keyboard "
    "cell_phone microwave oven toaster sink refrigerator book clock vase scissors teddy_bear hair_drier toothbrush"
).split()


def image_size(args, label_path):
    if args.size:
        w, _, h = args.size.lower().partition("x")
        return int(w), int(h)
    if args.image:
        from PIL import Image

        with Image.open(args.image) as im:
            return im.size
    sys.exit(f"{label_path}: need --image or --size to denormalise boxes")


def convert(label_path, image_id, width, height, names, min_conf, track_prefix):
    out = []
    for n, line in enumerate(Path(label_path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 5:
            sys.exit(f"{label_path}:{n}: expected class cx cy w h [conf] [id]")
        cls = int(parts[0])
        cx, cy, bw, bh = (float(p) for p in parts[1:5])
        conf = float(parts[5]) if len(parts) > 5 else 1.0
        if conf < min_conf:
            continue
        x0 = max(0.0, (cx - bw / 2) * width)
        y0 = max(0.0, (cy - bh / 2) * height)
        x1 = min(float(width), (cx + bw / 2) * width)
        y1 = min(float(height), (cy + bh / 2) * height)
        rec = {
            "image_id": image_id,
            "class_label": names[cls] if cls < len(names) else f"class_{cls}",
            "confidence": round(conf, 6),
            "bbox": [round(x0, 3), round(y0, 3), round(x1 - x0, 3), round(y1 - y0, 3)],
        }
        if len(parts) > 6:
            rec["identity"] = f"{track_prefix}{int(float(parts[6]))}"
        out.append(rec)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("labels", nargs="+", help="YOLO label .txt files (stem = image id)")
    ap.add_argument("--names", help="class names file, one per line (default: COCO)")
    ap.add_argument("--image", help="source image, for its pixel size (single label file only)")
    ap.add_argument("--size", help="image size WxH when --image is not given")
    ap.add_argument("--image-id", help="override the image id (single label file only)")
    ap.add_argument("--min-conf", type=float, default=0.25)
    ap.add_argument("--track-prefix", default="track-")
    args = ap.parse_args()

    if len(args.labels) > 1 and (args.image or args.image_id):
        ap.error("--image and --image-id need exactly one label file")
    names = Path(args.names).read_text().split() if args.names else COCO

    detections = []
    for label in args.labels:
        width, height = image_size(args, label)
        image_id = args.image_id or Path(label).stem
        detections += convert(label, image_id, width, height, names, args.min_conf, args.track_prefix)

    json.dump({"schema": "ave.detections", "schema_version": 1, "detections": detections}, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()

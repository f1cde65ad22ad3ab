#!/usr/bin/env python3
"""Regenerates data/fixtures/detections.jsonl and data/manifests/sample.jsonl.

Every image's largest and most confident region names its gold entity, so each
label resolves against the starter knowledge base.
"""
import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

DISTRACTORS = ["người", "bàn gỗ", "cây xanh", "bầu trời", "xe máy", "cái ghế", "mái hiên", "đám đông"]
ID_QUESTIONS = {
    "Cuisine": "Đây là món gì?",
    "Architecture": "Công trình trong ảnh là gì?",
    "Traditional Clothing": "Trang phục trong ảnh là gì?",
    "Landscapes": "Đây là cảnh quan nào? Đây là gì?",
}


def dump(obj):
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def box(rng, min_side):
    w = round(rng.uniform(min_side, 0.8), 3)
    h = round(rng.uniform(min_side, 0.8), 3)
    x1 = round(rng.uniform(0.0, 1.0 - w), 3)
    y1 = round(rng.uniform(0.0, 1.0 - h), 3)
    return [x1, y1, round(x1 + w, 3), round(y1 + h, 3)]


def variants_text(e):
    return " ".join(f"Tại {v['region']}, {v['note']}" for v in e["regional_variants"])


def questions_for(e, rng, count):
    name = e["canonical_name"]
    pool = [
        ("identification", ID_QUESTIONS.get(e["category"], "Đây là gì?"),
         f"Đây là {name}. {e['description']}"),
        ("explanation", f"Ý nghĩa văn hóa của {name} là gì?",
         " ".join(x for x in (e["description"], e["ceremonial_function"]) if x)),
        ("description", f"Hãy mô tả nguồn gốc của {name}.", e["historical_context"] or e["description"]),
    ]
    if e["regional_variants"]:
        pool.append(("comparison", f"{name} ở các vùng khác nhau như thế nào?", variants_text(e)))
    picked = [pool[0]] + rng.sample(pool[1:], count - 1)
    return [{"question": q, "answer": a, "qtype": t, "gold_entities": [e["id"]]} for t, q, a in picked]


def main():
    rng = random.Random(7)
    entities = [json.loads(l) for l in (DATA / "starter_kb.jsonl").read_text(encoding="utf-8").splitlines() if l]
    detections, records = [], []

    # The reference image: one dish and a small unrelated region.
    detections.append({"image_id": "banh_xeo_01", "label": "bánh xèo", "confidence": 0.92, "box": [0.1, 0.2, 0.6, 0.8]})
    detections.append({"image_id": "banh_xeo_01", "label": "rau sống", "confidence": 0.61, "box": [0.65, 0.55, 0.9, 0.8]})
    banh_xeo = next(e for e in entities if e["id"] == "banh_xeo")
    records.append({"image_id": "banh_xeo_01", "image_ref": "images/banh_xeo_01.jpg", "category": "Cuisine",
                    "complexity": "Low", "questions": questions_for(banh_xeo, rng, 2)})

    second = set(e["id"] for e in rng.sample(entities, 23))
    for e in entities:
        labels = [e["canonical_name"]] + (e["aliases"][:1] if e["id"] in second else [])
        for n, label in enumerate(labels, start=1):
            image_id = f"{e['id']}_{n + 1:02d}" if e["id"] == "banh_xeo" else f"{e['id']}_{n:02d}"
            primary = box(rng, 0.55)
            conf = round(rng.uniform(0.8, 0.97), 2)
            detections.append({"image_id": image_id, "label": label, "confidence": conf, "box": primary})
            area = (primary[2] - primary[0]) * (primary[3] - primary[1])
            for d in rng.sample(DISTRACTORS, rng.randint(0, 2)):
                while True:
                    b = box(rng, 0.05)
                    b = [b[0], b[1], round(b[0] + (b[2] - b[0]) / 2, 3), round(b[1] + (b[3] - b[1]) / 2, 3)]
                    if (b[2] - b[0]) * (b[3] - b[1]) < area and b[2] > b[0] and b[3] > b[1]:
                        break
                detections.append({"image_id": image_id, "label": d,
                                   "confidence": round(rng.uniform(0.3, conf - 0.05), 2), "box": b})
            records.append({"image_id": image_id, "image_ref": f"images/{image_id}.jpg", "category": e["category"],
                            "questions": questions_for(e, rng, rng.randint(1, 2))})

    # Images with nothing recognisable.
    detections.append({"image_id": "empty_01"})
    detections.append({"image_id": "unknown_01", "label": "vật thể lạ", "confidence": 0.5, "box": [0.2, 0.2, 0.7, 0.7]})

    (DATA / "fixtures").mkdir(exist_ok=True)
    (DATA / "manifests").mkdir(exist_ok=True)
    (DATA / "fixtures" / "detections.jsonl").write_text("".join(dump(d) + "\n" for d in detections), encoding="utf-8")
    (DATA / "manifests" / "sample.jsonl").write_text("".join(dump(r) + "\n" for r in records), encoding="utf-8")


if __name__ == "__main__":
    main()

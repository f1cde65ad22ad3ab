#!/usr/bin/env python3
"""Writes tests/data/fold_oracle.tsv: input, normalized, folded (via Python's unicodedata)."""
import pathlib
import random
import unicodedata

WORDS = ("Bánh xèo phở bò Áo dài nón lá Tết Nguyên Đán chùa Một Cột đấu vật đàn bầu vịnh Hạ Long "
         "Đoòng lì xì tò he đèn lồng ặ ỡ ự ữ Ỷ ẩ ệ ố ỗ ờ ợ ụ ủ ứ ừ ỳ ỵ ỹ Ằ Ẵ ĐƯỜNG Quốc Tử Giám "
         "thuyền thúng gốm Bát Tràng sơn mài múa rối nước ăn trầu").split()


def normalize(s):
    s = unicodedata.normalize("NFC", s)
    s = " ".join(s.split())
    return s.lower()


def fold(s):
    s = unicodedata.normalize("NFD", normalize(s))
    s = "".join(c for c in s if not (0x300 <= ord(c) <= 0x36F))
    return s.replace("đ", "d")


def main():
    rng = random.Random(11)
    rows = []
    for _ in range(300):
        words = [rng.choice(WORDS) for _ in range(rng.randint(1, 5))]
        words = [unicodedata.normalize(rng.choice(["NFC", "NFD"]), w) for w in words]
        words = [w.upper() if rng.random() < 0.2 else w for w in words]
        sep = [rng.choice([" ", "  ", " ", " 　 "]) for _ in words]
        text = rng.choice(["", " "]) + "".join(w + s for w, s in zip(words, sep)).rstrip(" ")
        rows.append((text, normalize(text), fold(text)))
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "fold_oracle.tsv"
    out.write_text("".join(f"{a}\t{b}\t{c}\n" for a, b, c in rows), encoding="utf-8")


if __name__ == "__main__":
    main()

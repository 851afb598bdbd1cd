#!/usr/bin/env python3
"""Writes the synthetic test corpus under tests/fixtures/.

Slovene-like and English-like text is generated from syllable inventories
with a Zipfian word distribution. Some Slovene documents carry runs of
scanning junk (as in OCR'd academic text) and some paragraphs are repeated
verbatim or with small edits so the dedup stage has work to do.

Output is a pure function of --seed.
"""

import argparse
import json
import random
from pathlib import Path

SL_ONSETS = ["", "b", "c", "č", "d", "g", "j", "k", "l", "m", "n", "p", "r", "s", "š", "t", "v", "z", "ž",
             "br", "dr", "gr", "kr", "pr", "tr", "sl", "sp", "st", "zn", "pl", "kl", "sv", "zv", "čl", "šk"]
SL_VOWELS = ["a", "e", "i", "o", "u", "a", "e", "o"]
SL_CODAS = ["", "", "", "n", "l", "r", "j", "m", "k", "t", "s", "č", "ž", "š", "v"]
SL_ENDINGS = ["", "a", "e", "i", "o", "u", "ega", "emu", "ih", "ami", "ov", "ni", "na", "ski", "ška", "ost", "iti",
              "ati", "ajo", "imo"]

EN_ONSETS = ["", "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "w", "th", "sh", "ch", "st", "pr",
             "tr", "bl", "cl", "gr", "wh"]
EN_VOWELS = ["a", "e", "i", "o", "u", "ea", "ou", "ai", "ee", "oo"]
EN_CODAS = ["", "", "n", "t", "r", "s", "d", "ll", "ng", "ck", "st", "nd", "rt"]
EN_ENDINGS = ["", "", "s", "ed", "ing", "er", "ly", "tion", "ness", "ment"]

JUNK = ["✦", "■", "□", "▪", "◆", "★", "", "", "¤", "§", "¶", "†", "‡", "•", "©", "®", "°", "±", "×", "÷"]


def make_lexicon(rng, onsets, vowels, codas, endings, n, min_syl, max_syl):
    words = set()
    while len(words) < n:
        syl = rng.randint(min_syl, max_syl)
        stem = "".join(rng.choice(onsets) + rng.choice(vowels) + rng.choice(codas) for _ in range(syl))
        words.add(stem + rng.choice(endings))
    return sorted(words)


class Zipf:
    def __init__(self, rng, words, s=1.05):
        self.rng = rng
        self.words = list(words)
        rng.shuffle(self.words)
        weights = [1.0 / (i + 1) ** s for i in range(len(self.words))]
        total = sum(weights)
        self.cdf = []
        acc = 0.0
        for w in weights:
            acc += w / total
            self.cdf.append(acc)

    def draw(self):
        u = self.rng.random()
        lo, hi = 0, len(self.cdf) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.cdf[mid] < u:
                lo = mid + 1
            else:
                hi = mid
        return self.words[lo]


def sentence(rng, zipf, lo=6, hi=18):
    words = [zipf.draw() for _ in range(rng.randint(lo, hi))]
    words[0] = words[0][:1].upper() + words[0][1:]
    text = " ".join(words)
    return text + rng.choice([".", ".", ".", "?", "!"])


def paragraph(rng, zipf):
    return " ".join(sentence(rng, zipf) for _ in range(rng.randint(2, 6)))


def with_junk(rng, text):
    words = text.split(" ")
    for _ in range(rng.randint(1, 3)):
        run = " ".join("".join(rng.choice(JUNK) for _ in range(rng.randint(2, 6))) for _ in range(rng.randint(1, 3)))
        pos = rng.randint(1, len(words) - 1)
        words.insert(pos, run)
    return " ".join(words)


def near_copy(rng, text, zipf):
    words = text.split(" ")
    for _ in range(max(1, len(words) // 60)):
        words[rng.randrange(len(words))] = zipf.draw()
    return " ".join(words)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=20240229)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    args = ap.parse_args()
    rng = random.Random(args.seed)

    sl_words = make_lexicon(rng, SL_ONSETS, SL_VOWELS, SL_CODAS, SL_ENDINGS, 4000, 1, 3)
    en_words = make_lexicon(rng, EN_ONSETS, EN_VOWELS, EN_CODAS, EN_ENDINGS, 3000, 1, 3)
    sl = Zipf(rng, sl_words)
    en = Zipf(rng, en_words)

    sl_dir = args.out / "corpus_sl"
    en_dir = args.out / "corpus_en"
    sl_dir.mkdir(parents=True, exist_ok=True)
    en_dir.mkdir(parents=True, exist_ok=True)

    pool = []
    # Academic-style documents, one per file, some with scanning junk.
    for i in range(60):
        paras = []
        for _ in range(rng.randint(4, 9)):
            if pool and rng.random() < 0.12:
                src = rng.choice(pool)
                paras.append(src if rng.random() < 0.5 else near_copy(rng, src, sl))
                continue
            p = paragraph(rng, sl)
            if rng.random() < 0.3:
                p = with_junk(rng, p)
            pool.append(p)
            paras.append(p)
        (sl_dir / f"kas_{i:03d}.txt").write_text("\n\n".join(paras) + "\n", encoding="utf-8")

    # News-style records.
    with open(sl_dir / "news.jsonl", "w", encoding="utf-8") as f:
        for i in range(420):
            paras = [paragraph(rng, sl) for _ in range(rng.randint(1, 3))]
            if rng.random() < 0.05:
                paras.append("Ključne besede: Москва, Αθήνα, 東京 in Ljubljana.")
            text = "\n\n".join(paras)
            if i > 10 and rng.random() < 0.08:
                text = near_copy(rng, pool[rng.randrange(len(pool))], sl)
            f.write(json.dumps({"id": f"news-{i:04d}", "source": "news", "text": text}, ensure_ascii=False) + "\n")

    with open(en_dir / "web.jsonl", "w", encoding="utf-8") as f:
        for i in range(250):
            text = "\n\n".join(paragraph(rng, en) for _ in range(rng.randint(1, 3)))
            f.write(json.dumps({"id": f"web-{i:04d}", "source": "web", "text": text}, ensure_ascii=False) + "\n")

    (args.out / "lexicon_sl.txt").write_text("\n".join(sl_words) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()

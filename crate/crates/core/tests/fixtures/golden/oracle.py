"""Independent oracle for a subset of lexical and fluency features.

Texts in corpus.json contain no apostrophes, so a word token is a
whitespace chunk with surrounding punctuation stripped.
"""
import json
import math
import string
from collections import Counter
from pathlib import Path

HERE = Path(__file__).parent
FILLED = {"um", "uh", "er", "ah", "hm", "mhm"}


def words(text):
    out = []
    for chunk in text.split():
        w = chunk.strip(string.punctuation).lower()
        if w:
            out.append(w)
    return out


def sentences(text):
    sents, cur = [], []
    for chunk in text.split():
        w = chunk.strip(string.punctuation).lower()
        if w:
            cur.append(w)
        if chunk[-1] in ".?!":
            sents.append(cur)
            cur = []
    if cur:
        sents.append(cur)
    return sents


def features(text):
    ws = words(text)
    n = len(ws)
    freq = Counter(ws)
    v = len(freq)
    spectrum = Counter(freq.values())
    v1 = spectrum.get(1, 0)
    imm = sum(1 for s in sentences(text) for a, b in zip(s, s[1:]) if a == b)
    return {
        "word_count": n,
        "type_count": v,
        "type_token_ratio": v / n,
        "root_ttr": v / math.sqrt(n),
        "brunet_index": n ** (v ** -0.165),
        "honore_statistic": 0.0 if v1 == v else 100 * math.log(n) / (1 - v1 / v),
        "hapax_ratio": v1 / n,
        "yule_k": 1e4 * (sum(i * i * c for i, c in spectrum.items()) - n) / n**2,
        "mean_word_length": sum(len(w) for w in ws) / n,
        "long_word_ratio": sum(len(w) >= 7 for w in ws) / n,
        "filled_pause_count": sum(w in FILLED for w in ws),
        "immediate_repetition_count": imm,
        "and_ratio": ws.count("and") / n,
    }


corpus = json.loads((HERE / "corpus.json").read_text())
oracle = {t["id"]: features(t["text"]) for t in corpus}
(HERE / "oracle.json").write_text(json.dumps(oracle, indent=1, sort_keys=True) + "\n")

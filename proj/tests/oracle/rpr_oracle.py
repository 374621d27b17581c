#!/usr/bin/env python3
"""Regenerates tests/fixtures/rpr_corpus.jsonl.

The scoring functions below transcribe the reference pseudocode line for line
(including scoring the whole lowercased text), once in floats and once in
exact fractions. The corpus generator is seeded, so rerunning the script
reproduces the fixture byte for byte.
"""

import json
import random
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

PHRASES = [
    "i need to", "we need to", "wait", "alternatively", "let me check",
    "let me see", "let's focus on", "we know that", "we can observe ",
    "we can see ", "let me try", "let's try", "let us try", "first,",
    "firstly,", "next,", "finally,", "let us first", "let's first",
    "let me first", "try again", "still not", "not working", "not correct",
    "does not work", "doesn't work", "makes sence", "since we", "because we",
    "consequently", "as a result", "thus", "therefore", "hence", "so that",
    "thereby", "if we", "given there", "for instance", "for example",
]
assert len(PHRASES) == 40


def calculate_ngram_repetition_penalty(text, n):
    words = text.split()
    ngrams = [tuple(words[i:i + n]) for i in range(len(words) - n + 1)]
    ngram_counts = Counter(ngrams)
    total_ngrams = len(ngrams)
    repeated_ngrams = sum(1 for count in ngram_counts.values() if count > 1)
    repetition_penalty = repeated_ngrams / total_ngrams if total_ngrams > 0 else 0
    return repetition_penalty


def reasoning_pattern_reward(solution):
    score = 0
    solution_str = solution.lower()
    for phrase in PHRASES:
        score += float(phrase in solution_str)
    score /= 40
    score -= calculate_ngram_repetition_penalty(solution_str, 20)
    score = max(0, score)
    return score


def exact_parts(solution):
    lowered = solution.lower()
    hits = [p for p in PHRASES if p in lowered]
    words = lowered.split()
    ngrams = [tuple(words[i:i + 20]) for i in range(len(words) - 20 + 1)]
    counts = Counter(ngrams)
    repeated = sum(1 for c in counts.values() if c > 1)
    exact = max(Fraction(0), Fraction(len(hits), 40) - (Fraction(repeated, len(ngrams)) if ngrams else 0))
    return hits, repeated, len(ngrams), exact


FILLER = ("the value of x is then computed from both sides and the sum of the terms "
          "gives a result that we compare against the bound on each interval").split()
UNICODE_WORDS = [
    "ÀÉÎÕÜ", "Ñandú", "ÆØÅ", "Straße", "ÇA", "ΑΒΓΔ", "ΦΙΛΟΣΟΦΙΑ", "Ωμέγα", "ЁЖИК", "ПРИВЕТ", "Ђурђев",
    "数学", "答案", "😀", "🧮", "∑", "√2", "ÉTÉ", "ΛΟΓΟΣ",
]
WHITESPACE = [" ", "  ", "\t", "\n", " ", "　", " ", "\x1c", "\x85", "\r\n"]


def random_case(rng, s):
    mode = rng.randrange(3)
    if mode == 0:
        return s
    if mode == 1:
        return s.upper()
    return "".join(c.upper() if rng.random() < 0.5 else c for c in s)


def filler(rng, k):
    return [rng.choice(FILLER) + (str(rng.randrange(1000)) if rng.random() < 0.3 else "") for _ in range(k)]


def phrase_dense(rng):
    parts = []
    for _ in range(rng.randrange(3, 25)):
        parts.append(random_case(rng, rng.choice(PHRASES)))
        parts.extend(filler(rng, rng.randrange(0, 6)))
    return " ".join(parts)


def repetition_attack(rng):
    unit = filler(rng, rng.randrange(8, 30))
    if rng.random() < 0.7:
        unit.insert(rng.randrange(len(unit)), rng.choice(PHRASES).strip())
    reps = rng.randrange(2, 8)
    words = []
    for _ in range(reps):
        words.extend(unit)
        if rng.random() < 0.3:
            words.extend(filler(rng, rng.randrange(1, 5)))
    return " ".join(words)


def unicode_text(rng):
    tokens = []
    for _ in range(rng.randrange(5, 60)):
        r = rng.random()
        if r < 0.35:
            tokens.append(rng.choice(UNICODE_WORDS))
        elif r < 0.6:
            tokens.append(random_case(rng, rng.choice(PHRASES)).strip())
        else:
            tokens.extend(filler(rng, 1))
    out = tokens[0]
    for t in tokens[1:]:
        out += rng.choice(WHITESPACE) + t
    return out


def formatted_response(rng):
    think = phrase_dense(rng) if rng.random() < 0.5 else repetition_attack(rng)
    answer = rng.choice(["\\boxed{42}", "\\boxed{\\frac{1}{2}}", "The answer is 7. Therefore, done.", ""])
    return f"User: solve it. Assistant: <think> {think} </think> <answer> {answer} </answer>"


EDGE_CASES = [
    "",
    " ",
    "\n\t 　",
    "wait",
    "WAIT",
    "Wait, what?",
    "we can see",
    "we can see it",
    "We Can Observe that",
    "we can observe\tthe tail",
    "thusly hencefort",
    "makes sense",
    "makes sence",
    "firstly, first, next, finally,",
    "First , Next ,",
    "doesn't work, does not work, not working, still not, not correct, try again",
    "i need to we need to if we since we because we so that given there",
    "alternatively consequently as a result thus therefore hence thereby for instance for example",
    "let me check let me see let me try let me first let's try let's first let's focus on let us try let us first",
    "we know that",
    # five distinct phrases, no repeated 20-gram
    "First, we need to factor the polynomial. Wait, the constant term is odd. "
    "Let me check the discriminant, and therefore the roots are real.",
    " ".join(["a"] * 19),
    " ".join(["a"] * 20),
    " ".join(["a"] * 21),
    " ".join(["a"] * 60),
    " ".join(["wait"] * 40),
    " ".join(str(i) for i in range(45)),
    " ".join(PHRASES),
    " ".join(PHRASES * 3),
    "İstanbul wait",
]


def build_corpus():
    rng = random.Random(20250316)
    texts = list(EDGE_CASES)
    for _ in range(40):
        texts.append(phrase_dense(rng))
    for _ in range(30):
        texts.append(repetition_attack(rng))
    for _ in range(25):
        texts.append(unicode_text(rng))
    for _ in range(20):
        texts.append(formatted_response(rng))
    return texts


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures" / "rpr_corpus.jsonl"
    rows = []
    for i, text in enumerate(build_corpus()):
        hits, repeated, positions, exact = exact_parts(text)
        score = reasoning_pattern_reward(text)
        assert abs(float(exact) - score) < 1e-12
        rows.append({
            "index": i,
            "text": text,
            "hits": hits,
            "repeated": repeated,
            "positions": positions,
            "exact": f"{exact.numerator}/{exact.denominator}",
            "score": score,
        })
    with out.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()

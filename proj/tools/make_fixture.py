#!/usr/bin/env python3
"""Generate the synthetic instruction fixture used by the acceptance suite.

Records are drawn from planted topics: each topic owns a small vocabulary,
and every instruction mixes mostly topic words with shared filler words.
A fraction of records blend two topics so the corpus has ambiguous regions.
"""
import argparse
import json
import random

SYLLABLES = ["ka", "lo", "mi", "ne", "ru", "ta", "vi", "zo", "pe", "shi", "qua", "dor", "fen", "gal", "hix"]
FILLER = ["the", "a", "of", "to", "and", "please", "write", "explain", "give", "list", "describe", "how", "what", "why"]


def make_word(rng):
    return "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--records", type=int, default=2000)
    ap.add_argument("--topics", type=int, default=20)
    ap.add_argument("--words-per-topic", type=int, default=25)
    ap.add_argument("--blend", type=float, default=0.15)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    used = set()
    topics = []
    for _ in range(args.topics):
        words = []
        while len(words) < args.words_per_topic:
            w = make_word(rng)
            if w not in used:
                used.add(w)
                words.append(w)
        topics.append(words)

    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for i in range(args.records):
            t = i % args.topics
            other = rng.randrange(args.topics) if rng.random() < args.blend else t
            n = rng.randint(6, 14)
            tokens = []
            for _ in range(n):
                r = rng.random()
                if r < 0.25:
                    tokens.append(rng.choice(FILLER))
                elif other != t and r < 0.6:
                    tokens.append(rng.choice(topics[other]))
                else:
                    tokens.append(rng.choice(topics[t]))
            instruction = " ".join(tokens).capitalize() + "."
            inp = " ".join(rng.choice(topics[t]) for _ in range(rng.randint(0, 4)))
            output = f"Response {i} about topic {t}."
            f.write(json.dumps({"instruction": instruction, "input": inp, "output": output}) + "\n")


if __name__ == "__main__":
    main()

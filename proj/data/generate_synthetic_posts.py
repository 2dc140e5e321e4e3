#!/usr/bin/env python3
"""Writes data/synthetic_posts.jsonl: 200 invented social media posts.

Every run produces the same file. Most posts discuss Shingrix, some
Zostavax, some are unrelated. A few carry URLs, @-mentions and HTML
entities so preprocessing has something to do. Sentences are kept short so
that sentence-level compression has clear matches.
"""

import argparse
import datetime as dt
import hashlib
import json
import random
from pathlib import Path

SEED = 20240601
N_POSTS = 200

SHINGRIX_OPENERS = [
    "Got my first Shingrix dose today.",
    "Booked the second Shingrix shot for March.",
    "Shingrix is free for over sixty fives here.",
    "My pharmacist recommended Shingrix last week.",
    "The Shingrix jab is two doses apart.",
    "Shingrix protects against shingles for years.",
    "Finally had the Shingrix vaccine yesterday.",
    "Shingrix clinic opens Monday at the library.",
    "Doctor said Shingrix beats the older vaccine.",
    "Mum had Shingrix without any trouble.",
    "Shingrix second dose knocked me flat.",
    "Waiting list for Shingrix is three weeks.",
    "Shingrix costs two hundred dollars privately.",
    "Nurse gave me Shingrix in the left arm.",
    "Our surgery ran out of Shingrix again.",
    "Is Shingrix worth it after chickenpox?",
]

SHINGRIX_FOLLOWUPS = [
    "My arm was sore for two days.",
    "The second dose gave me chills.",
    "I worry about the cost.",
    "Fever lasted one night only.",
    "Felt tired but went to work.",
    "No side effects at all.",
    "Headache cleared by lunchtime.",
    "Shingles pain is far worse than this.",
    "My neighbour had shingles twice.",
    "Insurance covered the whole thing.",
    "The pharmacy wait was short.",
    "I am nervous about dose two.",
    "Rash appeared near the injection site.",
    "Grandad got shingles in his eye.",
    "Recovery took about a day.",
    "Two shots means two sore arms.",
    "Cost is a barrier for pensioners.",
    "The nurse explained the schedule clearly.",
    "Friends are hesitant after hearing stories.",
    "Appointments book out fast in winter.",
    "Swollen arm needed an ice pack.",
    "Mild nausea the next morning.",
    "Efficacy numbers look really strong.",
    "Worth every minute of discomfort.",
    "Many concerns exist about dose two.",
    "Main concern is the price.",
]

ZOSTAVAX_OPENERS = [
    "Zostavax was the old shingles vaccine.",
    "Had Zostavax ten years ago.",
    "Zostavax is a live vaccine.",
    "Clinic stopped offering Zostavax last year.",
    "Zostavax protection fades over time.",
]

ZOSTAVAX_FOLLOWUPS = [
    "Should I get the newer one now?",
    "Doctor suggested switching vaccines.",
    "Immunocompromised patients cannot take it.",
    "One shot was convenient.",
    "Arm itched for a week.",
]

OTHER_POSTS = [
    "Flu shot season starts next month. Pharmacy queues are long.",
    "Walked ten kilometres today. Legs are tired.",
    "Great weather for the garden this weekend.",
    "Anyone tried the new bakery downtown? Croissants look amazing.",
    "My knee hurts after football. Physio booked for Friday.",
    "Covid booster clinic moved to the town hall.",
    "Reading a brilliant novel about sailing.",
    "Traffic on the motorway was terrible.",
    "I have a headache from too much coffee.",
    "Kids start school on Tuesday.",
]

PLATFORMS = ["x", "reddit", "youtube", "facebook", "twitter"]
NOISE = [
    lambda s: s + " More info https://example.org/shingles",
    lambda s: "@healthwatch " + s,
    lambda s: s.replace(" and ", " &amp; ") + " &quot;thanks&quot;",
    lambda s: s + " www.example.com/vaccines",
    lambda s: s.replace(".", ".\n", 1),
]


def build_posts():
    rng = random.Random(SEED)
    start = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)
    kinds = ["shingrix"] * 150 + ["zostavax"] * 25 + ["other"] * 25
    rng.shuffle(kinds)
    posts = []
    for i, kind in enumerate(kinds):
        if kind == "shingrix":
            parts = [rng.choice(SHINGRIX_OPENERS)]
            parts += rng.sample(SHINGRIX_FOLLOWUPS, rng.randint(1, 2))
        elif kind == "zostavax":
            parts = [rng.choice(ZOSTAVAX_OPENERS), rng.choice(ZOSTAVAX_FOLLOWUPS)]
        else:
            parts = [rng.choice(OTHER_POSTS)]
        text = " ".join(parts)
        if rng.random() < 0.12:
            text = rng.choice(NOISE)(text)
        created = start + dt.timedelta(hours=7 * i, minutes=rng.randint(0, 59))
        post = {
            "id": f"c{i + 1:04d}",
            "platform": rng.choice(PLATFORMS),
            "created_at": created.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "text": text,
        }
        if rng.random() < 0.8:
            post["author_hash"] = hashlib.sha256(f"author-{rng.randint(1, 120)}".encode()).hexdigest()[:16]
        posts.append(post)
    return posts


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).with_name("synthetic_posts.jsonl"))
    args = parser.parse_args()
    posts = build_posts()
    assert len(posts) == N_POSTS
    with args.out.open("w", encoding="utf-8", newline="\n") as f:
        for p in posts:
            f.write(json.dumps(p, ensure_ascii=False) + "\n")
    print(f"wrote {len(posts)} posts to {args.out}")


if __name__ == "__main__":
    main()

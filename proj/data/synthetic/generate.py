#!/usr/bin/env python3
"""Regenerates the bundled synthetic knowledge graph.

The graph is class-structured so that every label set is a function of the
given node's class, and the class is visible in the one-hop context (the
member_of edge to the class hub) as well as in the entity description. That
makes the task learnable for a bag-of-tokens encoder from the assembled
inputs alone. Label frequencies are kept deliberately flat so no single
label dominates the rankings.

Layout: 10 classes x 18 members + 10 hubs + 10 sigils + 10 elders = 210
entities, 5 relations. The likes edges of members 16 and 17 of every class form the
test split; everything else is training data.
"""

import os

N_CLASSES = 10
N_MEMBERS = 18
N_LIKES_TARGETS = 6  # first members of the next class, shared class-wide
TEST_MEMBERS = (16, 17)


def member(c, i):
    return f"m{c}_{i}"


def hub(c):
    return f"hub{c}"


def sigil(c):
    return f"sigil{c}"


def elder(c):
    return f"elder{c}"


def main():
    out_dir = os.path.dirname(os.path.abspath(__file__))
    train, test, desc = [], [], []

    for c in range(N_CLASSES):
        nxt = (c + 1) % N_CLASSES
        desc.append((hub(c), f"guild{c} hall; founded long ago"))
        desc.append((sigil(c), f"guild{c} sigil"))
        desc.append((elder(c), f"guild{c} elder"))
        train.append((hub(c), "rival_of", hub((c + 2) % N_CLASSES)))
        for i in range(N_MEMBERS):
            m = member(c, i)
            desc.append((m, f"guild{c}"))
            train.append((m, "member_of", hub(c)))
            train.append((m, "mentor_of", elder(nxt)))
            train.append((m, "bears", sigil((c + 5) % N_CLASSES)))
            split = test if i in TEST_MEMBERS else train
            for j in range(N_LIKES_TARGETS):
                split.append((m, "likes", member(nxt, j)))

    with open(os.path.join(out_dir, "train.tsv"), "w") as f:
        for h, r, t in train:
            f.write(f"{h}\t{r}\t{t}\n")
    with open(os.path.join(out_dir, "test.tsv"), "w") as f:
        for h, r, t in test:
            f.write(f"{h}\t{r}\t{t}\n")
    with open(os.path.join(out_dir, "descriptions.tsv"), "w") as f:
        for e, d in desc:
            f.write(f"{e}\t{d}\n")
    print(f"train={len(train)} test={len(test)} descriptions={len(desc)}")


if __name__ == "__main__":
    main()

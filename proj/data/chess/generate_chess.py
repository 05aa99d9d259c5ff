#!/usr/bin/env python3
# Copyright 2026 The kbcons Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the chess corpus (.kbr files) next to this script.

Moves are on an empty board: move(Piece, pos(File,Rank), pos(File,Rank)).
The only background predicate is diff(X,Y,D), the absolute distance between
two files or two ranks.
"""

import pathlib

HERE = pathlib.Path(__file__).resolve().parent
FILES = "abcdefgh"
HEADER = (
    "% Copyright 2026 The kbcons Authors\n"
    "% SPDX-License-Identifier: Apache-2.0\n"
    "% Generated by generate_chess.py; edit the script, not this file.\n"
)


def write(name, text):
    (HERE / name).write_text(HEADER + text)


def background():
    lines = ["#background"]
    for x in FILES:
        for y in FILES:
            lines.append(f"diff({x},{y},{abs(FILES.index(x) - FILES.index(y))}).")
    for x in range(1, 9):
        for y in range(1, 9):
            lines.append(f"diff({x},{y},{abs(x - y)}).")
    return "\n".join(lines) + "\n"


def move(piece, a, b):
    return f"move({piece},pos({a[0]},{a[1:]}),pos({b[0]},{b[1:]}))."


def evidence(pos, neg):
    out = ["#classes + -", "", "#evidence +"]
    out += [move(*m) for m in pos]
    out += ["", "#evidence -"]
    out += [move(*m) for m in neg]
    return "\n".join(out) + "\n"


def candidates(rules):
    return "#candidates\n" + "\n".join(rules) + "\n"


HEAD = "move({p},pos(F1,R1),pos(F2,R2))"


def shape(piece, df, dr, extra=""):
    body = f"diff(F1,F2,{df}), diff(R1,R2,{dr})" + (", " + extra if extra else "")
    return f"{HEAD.format(p=piece)} :- {body}."


TARGETS = {
    "rook": [shape("rook", 0, "D"), shape("rook", "D", 0)],
    "bishop": [shape("bishop", "D", "D")],
    "knight": [shape("knight", 1, 2), shape("knight", 2, 1)],
    "king": [shape("king", 1, 1), shape("king", 0, 1), shape("king", 1, 0)],
    "queen": [shape("queen", 0, "D"), shape("queen", "D", 0), shape("queen", "D", "D")],
}

POSITIVE = [
    ("rook", "a1", "a5"), ("rook", "d2", "d7"), ("rook", "h8", "h3"),
    ("rook", "a1", "f1"), ("rook", "c4", "g4"), ("rook", "h6", "b6"),
    ("bishop", "c1", "f4"), ("bishop", "a8", "e4"), ("bishop", "d4", "b6"),
    ("bishop", "g2", "h3"),
    ("knight", "d5", "e3"), ("knight", "b1", "c3"), ("knight", "g6", "f8"),
    ("knight", "b1", "d2"), ("knight", "e4", "c5"), ("knight", "g8", "e7"),
    ("king", "e1", "f2"), ("king", "d5", "c4"),
    ("king", "e1", "e2"), ("king", "b7", "b6"),
    ("king", "e8", "d8"), ("king", "g3", "h3"),
    ("queen", "d1", "d6"), ("queen", "a3", "a8"),
    ("queen", "d1", "a1"), ("queen", "b5", "h5"),
    ("queen", "d1", "h5"), ("queen", "f7", "c4"),
]

NEGATIVE = [
    ("rook", "a1", "c3"), ("rook", "h2", "e5"), ("rook", "d4", "e5"),
    ("rook", "b2", "c4"), ("rook", "g5", "h7"),
    ("bishop", "c1", "c5"), ("bishop", "f2", "f3"),
    ("bishop", "a1", "h1"), ("bishop", "d4", "b4"),
    ("knight", "d5", "e6"), ("knight", "b1", "d3"),
    ("knight", "g1", "g3"), ("knight", "c2", "c6"),
    ("knight", "e4", "a4"), ("knight", "b8", "d8"),
    ("king", "e1", "g1"), ("king", "d4", "f6"), ("king", "e1", "g2"),
    ("king", "e1", "e3"), ("king", "b2", "b4"),
    ("king", "c4", "a4"), ("king", "c3", "e5"), ("king", "c3", "e4"),
    ("knight", "c3", "d4"), ("knight", "f5", "g4"), ("knight", "a2", "b1"),
    ("queen", "f4", "h5"),
    ("queen", "d1", "e3"), ("queen", "a1", "b3"), ("queen", "h8", "g6"),
    ("queen", "a1", "c2"),
]

DISTRACTORS = [
    # Over-general: cover legal and illegal moves alike.
    "move(P,A,B).",
    "move(rook,A,B).",
    "move(bishop,A,B).",
    "move(knight,A,B).",
    "move(king,A,B).",
    "move(queen,A,B).",
    shape("P", 0, "D"),
    shape("P", "D", 0),
    shape("P", "D", "D"),
    shape("P", 1, 2),
    shape("P", 2, 1),
    shape("P", 1, 1),
    # Wrong shapes for the piece.
    shape("knight", 0, "D"),
    shape("bishop", 0, "D"),
    shape("rook", "D", "D"),
    shape("king", 0, 2),
    shape("bishop", "D", 0),
    shape("knight", "D", 0),
    shape("king", 0, "D"),
    shape("king", "D", 0),
    shape("king", "D", "D"),
    shape("king", 2, 0),
    shape("king", 2, 2),
    shape("king", 2, 1),
    shape("knight", 1, 1),
    shape("queen", 1, 2),
    shape("queen", 2, 1),
    shape("rook", 1, 2),
    # Correct but narrower than the piece's rule, or padded with redundancy.
    shape("rook", 0, 5),
    "move(rook,pos(a,R1),pos(a,R2)) :- diff(R1,R2,D).",
    "move(rook,pos(F1,1),pos(F2,1)) :- diff(F1,F2,D).",
    shape("bishop", 3, 3),
    shape("bishop", 2, 2),
    "move(bishop,pos(c,1),pos(F2,R2)) :- diff(c,F2,D), diff(1,R2,D).",
    "move(knight,pos(d,5),pos(F2,R2)) :- diff(d,F2,1), diff(5,R2,2).",
    "move(knight,pos(b,1),pos(F2,R2)) :- diff(b,F2,2), diff(1,R2,1).",
    "move(knight,pos(b,1),pos(F2,R2)) :- diff(b,F2,1), diff(1,R2,2).",
    "move(king,pos(e,1),pos(F2,R2)) :- diff(e,F2,1), diff(1,R2,1).",
    "move(king,pos(e,1),pos(F2,R2)) :- diff(e,F2,0), diff(1,R2,1).",
    "move(king,pos(e,8),pos(F2,R2)) :- diff(e,F2,1), diff(8,R2,0).",
    "move(queen,pos(d,1),pos(F2,R2)) :- diff(d,F2,0), diff(1,R2,D).",
    "move(queen,pos(d,1),pos(F2,R2)) :- diff(d,F2,D), diff(1,R2,0).",
    "move(queen,pos(d,1),pos(F2,R2)) :- diff(d,F2,D), diff(1,R2,D).",
    shape("queen", 0, 5),
    shape("queen", 3, 0),
    shape("queen", 4, 4),
    shape("rook", 0, "D", "diff(F1,F1,0)"),
    shape("bishop", "D", "D", "diff(R2,R1,D)"),
    shape("king", 1, 1, "diff(F2,F1,1)"),
]

# Two-phase corpus: rook and bishop first, then the queen on top of them.
REUSE_RB_POSITIVE = [
    ("rook", "a1", "a5"), ("rook", "d2", "d7"), ("rook", "h8", "h3"),
    ("rook", "b3", "b4"), ("rook", "f6", "f1"),
    ("rook", "a1", "f1"), ("rook", "c4", "g4"), ("rook", "h6", "b6"),
    ("rook", "e2", "d2"), ("rook", "g7", "a7"),
    ("bishop", "c1", "f4"), ("bishop", "a8", "e4"), ("bishop", "d4", "b6"),
    ("bishop", "g2", "h3"), ("bishop", "f1", "a6"), ("bishop", "h8", "a1"),
    ("bishop", "e5", "g3"), ("bishop", "b2", "c1"), ("bishop", "c6", "e8"),
    ("bishop", "h4", "e7"),
]
REUSE_RB_NEGATIVE = [
    ("rook", "a1", "c3"), ("rook", "b2", "c4"), ("rook", "h1", "e4"),
    ("rook", "d4", "e5"), ("rook", "f2", "h4"),
    ("bishop", "c1", "c5"), ("bishop", "d4", "e6"), ("bishop", "a1", "h1"),
    ("bishop", "f3", "g5"), ("bishop", "e2", "e3"),
    ("bishop", "b5", "f5"), ("bishop", "g4", "g8"),
]
REUSE_RB_CANDIDATES = TARGETS["rook"] + TARGETS["bishop"] + [
    "move(rook,A,B).",
    "move(bishop,A,B).",
    "move(P,A,B).",
    shape("rook", "D", "D"),
    shape("bishop", 0, "D"),
    shape("bishop", "D", 0),
    shape("rook", 0, 5),
    shape("bishop", 3, 3),
    "move(rook,pos(F1,1),pos(F2,1)) :- diff(F1,F2,D).",
    "move(bishop,pos(c,1),pos(F2,R2)) :- diff(c,F2,D), diff(1,R2,D).",
]

QUEEN_VIA = [
    "move(queen,A,B) :- move(rook,A,B).",
    "move(queen,A,B) :- move(bishop,A,B).",
]
REUSE_Q_POSITIVE = [
    ("queen", "d1", "d6"), ("queen", "a3", "a8"), ("queen", "h2", "h7"),
    ("queen", "c5", "c1"),
    ("queen", "d1", "a1"), ("queen", "b5", "h5"), ("queen", "g3", "c3"),
    ("queen", "d1", "h5"), ("queen", "f7", "c4"), ("queen", "a2", "g8"),
    ("queen", "e4", "b1"), ("queen", "h6", "f8"), ("queen", "c3", "e5"),
]
REUSE_Q_NEGATIVE = [
    ("queen", "d1", "e3"), ("queen", "a1", "c2"), ("queen", "h8", "f5"),
    ("queen", "b2", "d5"), ("queen", "e4", "g7"), ("queen", "c6", "a3"),
    ("queen", "g1", "e4"),
    # Other pieces borrowing the wrong rule.
    ("rook", "c1", "f4"), ("rook", "b2", "e5"), ("rook", "h1", "a8"),
    ("bishop", "d1", "d5"), ("bishop", "a3", "f3"), ("bishop", "h2", "h7"),
]
REUSE_Q_CANDIDATES = QUEEN_VIA + TARGETS["queen"] + [
    "move(P,A,B) :- move(rook,A,B).",
    "move(P,A,B) :- move(bishop,A,B).",
    "move(queen,A,B).",
    "move(queen,A,B) :- move(knight,A,B).",
    "move(rook,A,B) :- move(bishop,A,B).",
    "move(bishop,A,B) :- move(rook,A,B).",
    shape("queen", 1, 2),
    shape("queen", 2, 3),
]


def main():
    targets = [r for piece in ("rook", "bishop", "knight", "king", "queen") for r in TARGETS[piece]]
    assert len(POSITIVE) == 28 and len(NEGATIVE) == 31
    assert len(targets) + len(DISTRACTORS) == 60
    assert len(REUSE_RB_CANDIDATES) == 13 and len(REUSE_RB_POSITIVE + REUSE_RB_NEGATIVE) == 32
    assert len(REUSE_Q_CANDIDATES) == 13 and len(REUSE_Q_POSITIVE + REUSE_Q_NEGATIVE) == 26
    write("chess_bk.kbr", background())
    write("chess_evidence.kbr", evidence(POSITIVE, NEGATIVE))
    write("chess_candidates.kbr", candidates(targets + DISTRACTORS))
    write("chess_targets.kbr", candidates(targets))
    write("reuse_rb_evidence.kbr", evidence(REUSE_RB_POSITIVE, REUSE_RB_NEGATIVE))
    write("reuse_rb_candidates.kbr", candidates(REUSE_RB_CANDIDATES))
    write("reuse_rb_targets.kbr", candidates(TARGETS["rook"] + TARGETS["bishop"]))
    write("reuse_q_evidence.kbr", evidence(REUSE_Q_POSITIVE, REUSE_Q_NEGATIVE))
    write("reuse_q_candidates.kbr", candidates(REUSE_Q_CANDIDATES))
    write("reuse_q_targets.kbr", candidates(QUEEN_VIA))


if __name__ == "__main__":
    main()

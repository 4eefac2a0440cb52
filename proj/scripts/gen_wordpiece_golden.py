#!/usr/bin/env python3
"""Regenerates data/mini_vocab.txt and data/wordpiece_golden.tsv.

The golden tokenizations come from the HuggingFace `tokenizers` WordPiece
implementation so the C++ tokenizer is checked against an independent one.
"""
import string
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.pre_tokenizers import WhitespaceSplit

FULL_WORDS = [
    "information", "apple", "apply", "question", "answer", "search",
    "engine", "query", "document", "ranking", "model", "neural", "network",
    "robust", "typo", "dense", "retrieval", "training", "index", "the",
]

START_PIECES = [
    "in", "un", "re", "pre", "ret", "qu", "se", "do", "mo", "ne", "ro",
    "ty", "de", "tra", "ind", "ap", "an", "en", "ra", "sa", "ans",
]

CONTINUATIONS = [
    "##fr", "##oma", "##tion", "##ing", "##ed", "##er", "##al", "##ment",
    "##ness", "##ful", "##able", "##iva", "##rie", "##val", "##ork",
    "##ry", "##ery", "##ine", "##arch", "##ch", "##gine", "##ument",
    "##anking", "##del", "##ural", "##bust", "##po", "##nse", "##ex",
    "##erch", "##igne", "##emnt", "##ng", "##ual", "##rok", "##le",
    "##eer", "##sion", "##eival",
]

TEST_WORDS = [
    "information", "infromation", "apple", "apply", "applle",
    "retrieval", "retreival", "question", "quesion", "answer", "answeer",
    "search", "saerch", "engine", "enigne", "document", "docuemnt",
    "ranking", "rankng", "neural", "nerual", "network", "netwrok",
    "typo", "x" * 105,
]


def main():
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]
    vocab += FULL_WORDS + START_PIECES + CONTINUATIONS
    vocab += list(string.ascii_lowercase) + list(string.digits)
    vocab += ["##" + c for c in string.ascii_lowercase + string.digits]
    assert len(vocab) == len(set(vocab)), "duplicate vocab entry"

    tok = Tokenizer(WordPiece({t: i for i, t in enumerate(vocab)},
                              unk_token="[UNK]"))
    tok.pre_tokenizer = WhitespaceSplit()

    with open("data/mini_vocab.txt", "w") as f:
        f.write("\n".join(vocab) + "\n")

    with open("data/wordpiece_golden.tsv", "w") as f:
        for word in TEST_WORDS:
            pieces = tok.encode(word).tokens
            f.write(word + "\t" + " ".join(pieces) + "\n")
            print(word[:40], "->", pieces)

    assert len(TEST_WORDS) == 25


if __name__ == "__main__":
    main()

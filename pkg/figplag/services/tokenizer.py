"""Tokenizer shared by preprocessing and gazetteer loading."""

import re

from figplag.models.text import Token

# Maximal runs of Unicode letters or digits.
TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[Token]:
    """Split *text* into letter/digit runs; every other character is a separator."""
    tokens = []
    for position, match in enumerate(TOKEN_RE.finditer(text)):
        surface = match.group(0)
        lower = surface.lower()
        tokens.append(Token(surface=surface, lower=lower, lemma=lower, position=position))
    return tokens


def split_words(text: str) -> tuple[str, ...]:
    return tuple(TOKEN_RE.findall(text))

"""Transcript normalization."""

from hypothesis import given
from hypothesis import strategies as st

from voicegate.text import normalize, normalized_key


def test_wake_word_and_punctuation_stripped():
    assert normalize("Alexa, turn on the lights!") == ["turn", "on", "the", "lights"]


def test_empty_input():
    assert normalize("") == []


def test_case_and_whitespace_folding():
    assert normalize("Open   THE  door") == ["open", "the", "door"]


def test_google_wake_prefixes():
    assert normalize("hey google, open the door") == ["open", "the", "door"]
    assert normalize("OK Google open the door") == ["open", "the", "door"]


def test_wake_word_only_when_leading():
    # "alexa" mid-sentence is content, not a wake word
    assert normalize("ask alexa to sing") == ["ask", "alexa", "to", "sing"]


def test_apostrophes_kept():
    assert normalize("what's the weather") == ["what's", "the", "weather"]


@given(st.text(max_size=80))
def test_normalize_idempotent(text):
    tokens = normalize(text)
    assert normalize(" ".join(tokens)) == tokens


@given(st.text(max_size=80))
def test_tokens_within_charset(text):
    allowed = set("abcdefghijklmnopqrstuvwxyz0123456789'")
    for token in normalize(text):
        assert token
        assert set(token) <= allowed


def test_normalized_key_joins_tokens():
    assert normalized_key("Open   THE  door!") == "open the door"

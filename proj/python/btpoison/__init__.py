"""Poisoning attacks on back-translation training data."""

import json

from . import _core
from ._core import Aligner, Error, StubTranslator, detokenize, echo_complete, tokenize

__all__ = [
    "Aligner",
    "Error",
    "StubTranslator",
    "attack_success",
    "bt_test",
    "corpus_bleu",
    "craft",
    "detokenize",
    "echo_complete",
    "exposure",
    "inject",
    "smuggle",
    "stub",
    "tokenize",
]


def _dump(value):
    return value if isinstance(value, str) else json.dumps(value)


def stub(config):
    """Offline translator from a config dict (seed, dictionary, drop, insert)."""
    return StubTranslator(_dump(config))


def inject(text, spec, begin, end):
    return json.loads(_core.inject(text, _dump(spec), begin, end))


def craft(lines, spec, n_p, seed=0):
    return json.loads(_core.craft(list(lines), _dump(spec), n_p, seed))


def bt_test(candidates, translator, spec, anchors=()):
    return json.loads(_core.bt_test(_dump(candidates), translator, _dump(spec), list(anchors)))


def smuggle(candidates, translator, spec, anchors=(), n_p=100, k=10, seed=0):
    return json.loads(
        _core.smuggle(_dump(candidates), translator, _dump(spec), list(anchors), n_p, k, seed)
    )


def corpus_bleu(hypotheses, references):
    return json.loads(_core.corpus_bleu(list(hypotheses), list(references)))


def attack_success(hypotheses, spec):
    return _core.attack_success(list(hypotheses), _dump(spec))


def exposure(total, n_p, alarm_threshold=0.01):
    return json.loads(_core.exposure(total, n_p, alarm_threshold))

import math
import random

import numpy as np
import pytest

from pasurf.gallery import gallery_case
from pasurf.scenes import compile_scene
from pasurf.verify import compute_bundle


@pytest.fixture(scope="session")
def compiled_cases():
    """Compiled gallery scenes, built once per test session."""
    cache = {}

    def get(case_id):
        if case_id not in cache:
            case = gallery_case(case_id)
            cache[case_id] = (case, compile_scene(case.scene()))
        return cache[case_id]

    return get


@pytest.fixture(scope="session")
def bundles(compiled_cases):
    """Full verification bundles, computed once and shared by all tests."""
    cache = {}

    def get(case_id, **kwargs):
        key = (case_id, tuple(sorted(kwargs.items())))
        if key not in cache:
            case, compiled = compiled_cases(case_id)
            cache[key] = (case, compute_bundle(compiled, **kwargs))
        return cache[key]

    return get


# -- random but domain-safe expression sources --------------------------------

_SAFE_UNARY = [
    "sin({})", "cos({})", "tanh({})", "atan({})", "asinh({})", "sech({})",
    "exp(0.4*tanh({}))", "log(2.2 + sin({}))", "sqrt(2.2 + cos({}))",
    "1/(2.5 + sin({}))",
]
_SAFE_BINARY = [
    "0.5*({} + {})", "0.5*({} - {})", "0.5*({})*({})", "({})/(2.5 + ({})^2)",
]


def random_expression(rng: random.Random, names, depth=3) -> str:
    """A smooth expression, bounded and domain-safe for any real inputs."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return rng.choice(names)
        return f"{rng.uniform(-1.5, 1.5):.3f}"
    if rng.random() < 0.55:
        inner = random_expression(rng, names, depth - 1)
        return rng.choice(_SAFE_UNARY).format(inner)
    a = random_expression(rng, names, depth - 1)
    b = random_expression(rng, names, depth - 1)
    return rng.choice(_SAFE_BINARY).format(a, b)

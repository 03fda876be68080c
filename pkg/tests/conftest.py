import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from docreward.text_distance import warmup

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    warmup()


# A small corpus of well-formed tables of varying shape, used for identity
# and monotonicity checks.
TABLE_FIXTURES = [
    "<table><tr><td>a</td></tr></table>",
    "<table><tr><th>h1</th><th>h2</th></tr><tr><td>1</td><td>2</td></tr></table>",
    (
        "<table><thead><tr><th>name</th><th>value</th></tr></thead>"
        "<tbody><tr><td>alpha</td><td>10</td></tr>"
        "<tr><td>beta</td><td>20</td></tr></tbody></table>"
    ),
    '<table><tr><td colspan="2">wide</td></tr><tr><td>a</td><td>b</td></tr></table>',
    '<table><tr><td rowspan="2">tall</td><td>x</td></tr><tr><td>y</td></tr></table>',
    "<table><tr><td>中文</td><td>表格</td></tr></table>",
    (
        "<table><caption>totals</caption><tr><td>q1</td><td>q2</td><td>q3</td></tr>"
        "<tr><td>1</td><td>2</td><td>3</td></tr></table>"
    ),
    "<table><tr><td>outer<table><tr><td>inner</td></tr></table></td></tr></table>",
    "<table><tr><td>a<td>b<tr><td>c</table>",  # unclosed tags
    (
        "<table><tr><th>col</th></tr>"
        + "".join(f"<tr><td>row {i}</td></tr>" for i in range(6))
        + "</table>"
    ),
]

MD_TABLE_FIXTURES = [
    "| a | b |\n|---|---|\n| 1 | 2 |",
    "| only | data |\n| 3 | 4 |",
    "| x |\n|---|\n| 1 |\n| 2 |\n| 3 |",
]


def random_string(rng: random.Random, alphabet: str, max_len: int, min_len: int = 0) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(min_len, max_len + 1)))


def random_tagged_doc(rng: random.Random, n_segments: int, seg_len: int = 24) -> str:
    segs = []
    for _ in range(n_segments):
        segs.append(random_string(rng, "abcdefgh ijklmnop", seg_len, 1))
    return "".join(f"<ele>{s}</ele>" for s in segs)

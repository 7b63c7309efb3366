from stranded_grid.lp import INF, LpBuilder, MixedIntegerProgram
from stranded_grid.lp.mps import to_mps, write_mps

GOLDEN = """\
NAME demo
ROWS
 N  obj
 L  c1
 G  c2
 E  c3
COLUMNS
    MARKER  'MARKER'  'INTORG'
    x  obj  -1.0
    x  c1  1.0
    x  c3  2.0
    MARKER  'MARKER'  'INTEND'
    y  obj  2.0
    y  c1  1.0
    y  c2  1.0
    z  c2  -1.0
    z  c3  1.0
RHS
    RHS  c1  5.0
    RHS  c2  1.0
    RHS  c3  2.0
RANGES
    RNG  c2  2.0
BOUNDS
 UP BND  x  4.0
 LO BND  y  -1.0
 FR BND  z
ENDATA
"""


def demo_mip():
    b = LpBuilder(name="demo")
    x = b.add_var("x", 0, 4, -1.0)
    y = b.add_var("y", -1, INF, 2.0)
    z = b.add_var("z", -INF, INF, 0.0)
    b.add_row("c1", {x: 1.0, y: 1.0}, -INF, 5.0)
    b.add_row("c2", {y: 1.0, z: -1.0}, 1.0, 3.0)  # ranged
    b.add_row("c3", {x: 2.0, z: 1.0}, 2.0, 2.0)
    return MixedIntegerProgram(b.build(), (x,))


def test_golden():
    assert to_mps(demo_mip()).strip() == GOLDEN.strip()


def test_write_mps(tmp_path):
    path = tmp_path / "demo.mps"
    write_mps(demo_mip(), path)
    assert path.read_text().strip() == GOLDEN.strip()


def test_plain_lp_has_no_markers():
    text = to_mps(demo_mip().lp)
    assert "MARKER" not in text and "x  obj  -1.0" in text


def test_names_without_whitespace():
    b = LpBuilder(name="two words")
    v = b.add_var("p[g 1,0]", 0, 1, 1.0)
    b.add_row("bal ance", {v: 1.0}, 0.0, INF)
    text = to_mps(b.build())
    assert "p[g_1,0]" in text and "bal_ance" in text and "NAME two_words" in text

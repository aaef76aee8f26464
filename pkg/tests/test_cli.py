import subprocess
import sys

import pytest

from warpgeo.cli import list_catalog, main, parse_scene
from warpgeo.errors import SceneError

ROT = "eps = -1\nwarp.name = linear\nwarp.a = 2\ntask = rotational\nc = 0\ntype = spherical\n"


def run(tmp_path, text, *extra):
    scene = tmp_path / "s.scene"
    scene.write_text(text)
    out = tmp_path / "out"
    return main(["run", str(scene), "-o", str(out), *extra]), out


def test_rotational_scene(tmp_path):
    code, out = run(tmp_path, ROT)
    assert code == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["csc_residuals.csv", "plot_phi.dat", "plot_xi.dat", "profile.csv", "report.txt"]
    report = (out / "report.txt").read_text().splitlines()
    assert report[0].startswith("csc ") and report[0].endswith(" pass")
    for line in (out / "plot_phi.dat").read_text().splitlines():
        assert len(line.split()) == 2


def test_float_format(tmp_path):
    code, out = run(tmp_path, ROT)
    row = (out / "profile.csv").read_text().splitlines()[1].split(",")
    # 17 significant digits, so every value round-trips exactly
    assert all("%.17g" % float(x) == x for x in row)
    assert float(row[0]) == 0.5


def test_missing_eps(tmp_path, capsys):
    code, out = run(tmp_path, "task = rotational\nwarp.name = linear\nc = 0\ntype = spherical\n")
    assert code == 2 and not out.exists()
    assert "missing required key 'eps'" in capsys.readouterr().err


@pytest.mark.parametrize("text,line,col", [
    ("eps = 1\ntask rotational\n", 2, 1),
    ("eps = 1\n  9x = 2\ntask = verify\n", 2, 3),
    ("eps = 1\ntask = verify\neps = 0\n", 3, 1),
    ("eps = 1\ntask = verify\nwarp.name = exp\nwarp.A = abc\n", 4, 10),
    ("eps = 2\ntask = verify\n", 1, 7),
    ("eps = 1\ntask = nothing\n", 2, 8),
    ("eps = 1\ntask = parallel\nwarp.name = exp\n", 3, 13),
    ("eps = 1  # comment\ntask = verify\nbogus = 1\n", 3, 9),
])
def test_parse_errors(text, line, col):
    with pytest.raises(SceneError) as exc:
        parse_scene(text)
    assert (exc.value.line, exc.value.column) == (line, col)
    assert str(exc.value).startswith(f"{line}:{col}: ")


def test_comments_and_fractions():
    sc = parse_scene("# header\neps = 1 # trailing\ntask = cylinder\n\nLambda = -8/2\n")
    assert sc.number("Lambda") == -4.0 and sc.number("eps", integer=True) == 1


def test_cylinder_defaults_eps(tmp_path):
    code, out = run(tmp_path, "task = cylinder\nn = 5\nk = 2\n", "--grid", "3")
    assert code == 0
    assert "Lambda -4\n" in (out / "cylinder.txt").read_text()
    with pytest.raises(SceneError):
        parse_scene("task = cylinder\neps = -1\n")


def test_failed_verdict(tmp_path, capsys):
    code, out = run(tmp_path, "task = cylinder\nn = 5\nk = 2\nLambda = -4\nspread = 100\n", "--grid", "3")
    assert code == 1
    assert str(out / "report.txt") in capsys.readouterr().err
    assert "fail" in (out / "report.txt").read_text()


def test_tol_override(tmp_path):
    code, _ = run(tmp_path, ROT, "--tol", "1e-14")
    assert code == 1


def test_numeric_error(tmp_path, capsys):
    code, out = run(tmp_path, ROT + "seed.s0 = 1\nseed.y0 = 50\n")
    assert code == 3 and not out.exists()
    assert "numeric error" in capsys.readouterr().err


def test_table_rejection(tmp_path):
    code, _ = run(tmp_path, ROT.replace("type = spherical", "type = hyperbolic"))
    assert code == 2


def test_no_temp_files(tmp_path):
    code, out = run(tmp_path, ROT)
    assert not [p for p in out.iterdir() if p.name.startswith(".tmp")]


def test_catalog(capsys):
    assert main(["catalog"]) == 0
    text = capsys.readouterr().out
    assert text == list_catalog()
    lines = text.splitlines()
    i, j, k = (lines.index(h) for h in ("profile functions f:", "warping functions psi:", "tasks:"))
    assert j - i - 1 == 5 and k - j - 1 == 6
    for task in ("rotational", "parallel", "graph", "cylinder", "verify"):
        assert any(l.strip().startswith(task + ":") for l in lines[k:])


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "warpgeo.cli", "catalog"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("warps:")

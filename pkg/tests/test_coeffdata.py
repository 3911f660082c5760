import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from zetamoments.coeffdata import (
    CoefficientFile,
    CoefficientParseError,
    diff_coefficients,
    load_coefficients,
    merge_coefficient_files,
    parse_coefficient_text,
    read_coefficient_file,
    save_coefficients,
    shipped_coefficients,
    shipped_method1,
    shipped_names,
    shipped_path,
    verify_checksums,
)
from zetamoments.mpcontext import precision
from zetamoments.polynomial import MomentPolynomial

K1 = "# k=1\n# P=101\nr,value,stable_digits,source\n0,1.0e+00,20,computed\n1,1.1544313298030657212e+00,19,computed\n"


def test_parse_minimal():
    cf = parse_coefficient_text(K1)
    assert cf.k == 1 and cf.metadata["P"] == "101"
    assert cf.rows[1].significant_digits == 20
    poly = cf.to_polynomial()
    assert poly.provenance == "computed" and poly.stable_digits == [20, 19]


@pytest.mark.parametrize(
    "text,line",
    [
        (K1.replace("1.0e+00", "1.0"), 4),
        (K1.replace(",computed\n1,", ",guess\n1,"), 4),
        (K1 + "1,2.0e+00,3,computed\n", 6),
        (K1.replace("r,value", "r,val"), 3),
        (K1.replace("0,1.0e+00,20", "x,1.0e+00,20"), 4),
        (K1.replace("# P=101", "# P"), 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(CoefficientParseError) as info:
        parse_coefficient_text(text, "f.csv")
    assert info.value.line == line
    assert f"f.csv:{line}" in str(info.value)


def test_parse_structural_errors():
    with pytest.raises(CoefficientParseError, match="k="):
        parse_coefficient_text(K1.replace("# k=1\n", ""))
    with pytest.raises(CoefficientParseError, match="missing"):
        parse_coefficient_text(K1.replace("0,1.0e+00,20,computed\n", ""))
    with pytest.raises(CoefficientParseError, match="only method1"):
        parse_coefficient_text("# k=2\nr,value,stable_digits,source\n0,1.0e+00,3,computed\n")


def test_published_rows_verbatim():
    k4 = read_coefficient_file(shipped_path(4))
    assert k4.rows[0].text == "2.465018391934227354079894e-13"
    assert k4.rows[0].stable_digits == 24 and k4.rows[0].source == "paper-table"
    assert len(k4.rows) == 17


def test_every_shipped_file_parses():
    names = shipped_names()
    assert len(names) == 23
    for k in range(1, 14):
        poly = shipped_coefficients(k)
        assert poly.is_complete and poly.k == k
    for k in range(4, 14):
        assert len(shipped_method1(k)) == 8
    assert verify_checksums() == []


def test_k6_segments_in_header():
    meta = read_coefficient_file(shipped_path(6)).metadata
    assert "segment1" in meta and "segment2" in meta


def test_shipped_path_errors():
    with pytest.raises(FileNotFoundError):
        shipped_path(14)
    with pytest.raises(ValueError):
        shipped_path(2, "other")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e30, 1e30, allow_nan=False).filter(lambda x: x != 0), min_size=5, max_size=5), st.integers(2, 30))
def test_round_trip(values, sig):
    with precision(256):
        poly = MomentPolynomial(2, [mpfr(v) for v in values], [sig - 1] * 5, "computed", {"digits": str(sig)})
        text = CoefficientFile.from_polynomial(poly).dumps()
        back = parse_coefficient_text(text)
        again = CoefficientFile(back.k, back.rows, back.metadata).dumps()
    assert again == text


def test_save_load(tmp_path):
    with precision(200):
        poly = MomentPolynomial(1, [mpfr(1), mpfr(1) / 3], [10, 10], "computed", {"digits": "12"})
        save_coefficients(poly, tmp_path / "a.csv")
        back = load_coefficients(tmp_path / "a.csv")
    assert str(back[1]).startswith("0.333333333333")


def test_diff_and_merge():
    a = parse_coefficient_text(K1)
    b = parse_coefficient_text(K1.replace("1.1544313298030657212e+00,19", "1.1544313298e+00,9"))
    rep = diff_coefficients(a.to_polynomial(), b.to_polynomial())
    assert rep.matched == [(0, 20), (1, 9)]
    assert rep.min == 9 and "min=9" in rep.format()
    merged = merge_coefficient_files([b, a])
    assert [row.stable_digits for row in merged.rows] == [20, 19]
    assert merged.metadata["part2"].startswith("r=1")
    with pytest.raises(ValueError):
        merge_coefficient_files([a, read_coefficient_file(shipped_path(4))])


def test_method1_column_matches_published_column():
    for k in range(4, 8):
        rep = diff_coefficients(shipped_coefficients(k), shipped_method1(k))
        assert rep.min >= 6, (k, rep.matched)

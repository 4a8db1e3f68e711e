"""Step definitions binding point_report.feature to the point command."""

import re

import pytest
from pytest_bdd import parsers, scenarios, then

from composite_entropy.core.sweep import read_csv

scenarios("features/point_report.feature")


@then(parsers.parse("the report shows S_R2 with closed form {value}"))
def shows_closed_form(ctx, value):
    line = next(line for line in ctx["out"].splitlines() if line.strip().startswith("S_R2 "))
    assert f"(closed form {value})" in line


@then(parsers.parse("the report shows the effective temperature {value:g}"))
def shows_temperature(ctx, value):
    match = re.search(r"^\s+kT\s+(\S+)$", ctx["out"], re.MULTILINE)
    assert match is not None
    assert float(match.group(1)) == pytest.approx(value)


@then(parsers.parse('"{name}" holds {count:d} row with S_R2 near {value:g}'))
def csv_row(ctx, name, count, value):
    rows = read_csv(ctx["dir"] / name)
    assert len(rows) == count
    assert rows[0]["S_R2"] == pytest.approx(value, abs=1e-4)


@then("the report says the semi-classical entropies are skipped")
def skipped(ctx):
    assert "semi-classical entropies are undefined" in ctx["log"]

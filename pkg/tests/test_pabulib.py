from pathlib import Path

import pytest

from pbkit.pabulib import PabulibParseError, parse_election, parse_pabulib, \
    read_pabulib_file

FIXTURES = Path(__file__).parent / "fixtures" / "pabulib"
BROKEN = Path(__file__).parent / "fixtures" / "pabulib_broken"

WARSAW_FILES = sorted(
    p for p in FIXTURES.glob("poland_warszawa_*.pb") if "oversize" not in p.name
)


def test_minimal_fixture():
    inst = parse_pabulib((FIXTURES / "minimal.pb").read_text())
    assert inst.num_voters == 2
    assert inst.num_projects == 2
    assert inst.budget == 100.0
    assert inst.project_ids == ("A", "B")
    assert list(inst.costs) == [60.0, 50.0]
    assert inst.approvals == (frozenset({0}), frozenset({0, 1}))


def test_warsaw_files_parse():
    assert len(WARSAW_FILES) >= 3
    for path in WARSAW_FILES:
        election = read_pabulib_file(path)
        inst = election.instance
        assert 20 <= inst.num_projects <= 50
        assert 50 <= inst.num_voters <= 10_000
        assert election.meta["country"] == "Poland"
        assert inst.budget > 0
        assert election.dropped_ballots == 0
        # dense remap keeps the published id for every column
        assert len(inst.project_ids) == inst.num_projects


def test_oversize_file_parses_but_exceeds_filter():
    inst = parse_pabulib((FIXTURES / "poland_warszawa_2018_zoliborz_oversize.pb").read_text())
    assert inst.num_projects > 50


def test_missing_budget():
    with pytest.raises(PabulibParseError, match="budget"):
        parse_pabulib((BROKEN / "broken_missing_budget.pb").read_text())


def test_non_approval_vote_type():
    with pytest.raises(PabulibParseError, match="vote_type"):
        parse_pabulib((BROKEN / "broken_ordinal.pb").read_text())


def test_unknown_project_strict_names_line():
    text = (BROKEN / "broken_unknown_project.pb").read_text()
    with pytest.raises(PabulibParseError, match="line 12.*999"):
        parse_pabulib(text)


def test_unknown_project_lenient_drops_ballot():
    text = (BROKEN / "broken_unknown_project.pb").read_text()
    election = parse_election(text, lenient=True)
    assert election.dropped_ballots == 1
    assert election.instance.num_voters == 2


def test_empty_votes_section():
    with pytest.raises(PabulibParseError, match="VOTES"):
        parse_pabulib((BROKEN / "broken_empty_votes.pb").read_text())


def test_zero_cost_rejected():
    with pytest.raises(PabulibParseError, match="line 7"):
        parse_pabulib((BROKEN / "broken_zero_cost.pb").read_text())


def test_decimal_comma_budget():
    text = "\n".join([
        "META", "key;value", "budget;1000,50", "vote_type;approval",
        "PROJECTS", "project_id;cost", "1;400,25", "VOTES",
        "voter_id;vote", "1;1",
    ])
    inst = parse_pabulib(text)
    assert inst.budget == 1000.5
    assert inst.costs[0] == 400.25


def test_all_fixture_failures_are_typed():
    for path in BROKEN.glob("*.pb"):
        with pytest.raises(PabulibParseError):
            parse_pabulib(path.read_text())

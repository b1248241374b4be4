import json

import pytest

from qhist.analysis import analyze
from qhist.errors import ParseError
from qhist.scenarios import build_fig1b, compile_document, fig1a_document
from qhist.schemas import (
    AnalysisReport,
    emit_document,
    emit_report,
    parse_document,
    parse_report,
)


@pytest.fixture()
def fig1a_data():
    return json.loads(emit_document(fig1a_document()))


class TestParseDocument:
    def test_round_trip_equality(self):
        doc = fig1a_document()
        assert parse_document(emit_document(doc)) == doc

    def test_invalid_json(self):
        with pytest.raises(ParseError) as err:
            parse_document("{not json")
        assert "invalid JSON" in err.value.diagnostics[0]

    def test_unknown_schema_version(self, fig1a_data):
        fig1a_data["schemaVersion"] = 99
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("schemaVersion" in d for d in err.value.diagnostics)

    def test_undefined_label_is_named(self, fig1a_data):
        fig1a_data["families"]["arm"]["times"][0]["alternatives"]["c"] = [
            [[[1.0, 0.0], ["g", "C", "D"]]]
        ]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("'g'" in d for d in err.value.diagnostics)

    def test_near_unit_amplitude_accepted_and_recorded(self, fig1a_data):
        # 0.70710678 is 3e-9 off in norm: accepted, renormalized with a note
        fig1a_data["initial"] = [
            [[0.70710678, 0.0], ["a", "C", "D"]],
            [[0.70710678, 0.0], ["c", "C", "D"]],
        ]
        doc = parse_document(json.dumps(fig1a_data))
        scenario = compile_document(doc)
        assert any("renormalized initial state" in note for note in scenario.notes)
        assert scenario.families["arm"].initial.normalized

    def test_sloppy_amplitude_rejected(self, fig1a_data):
        # 0.7071 is 1e-4 off in norm: fail loudly instead of skewing results
        fig1a_data["initial"] = [
            [[0.7071, 0.0], ["a", "C", "D"]],
            [[0.7071, 0.0], ["c", "C", "D"]],
        ]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("norm" in d for d in err.value.diagnostics)

    def test_non_finite_amplitude_rejected(self, fig1a_data):
        fig1a_data["initial"] = [[[float("nan"), 0.0], ["a", "C", "D"]]]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("non-finite" in d for d in err.value.diagnostics)

    def test_all_violations_reported(self, fig1a_data):
        fig1a_data["schemaVersion"] = 7
        fig1a_data["initial"] = [[[1.0, 0.0], ["g", "C", "D"]]]
        fig1a_data["families"]["arm"]["times"][0]["time"] = 5
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert len(err.value.diagnostics) >= 3

    def test_reserved_alternative_name(self, fig1a_data):
        times = fig1a_data["families"]["arm"]["times"]
        times[0]["alternatives"]["REST"] = [[[[1.0, 0.0], ["e", "C", "D"]]]]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("reserved" in d for d in err.value.diagnostics)

    def test_unknown_check_family(self, fig1a_data):
        fig1a_data["checks"][0]["family"] = "nope"
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("unknown family" in d for d in err.value.diagnostics)

    def test_duplicate_check_names(self, fig1a_data):
        fig1a_data["checks"][1]["name"] = fig1a_data["checks"][0]["name"]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("unique" in d for d in err.value.diagnostics)

    def test_structural_error_lists_location(self):
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps({"schemaVersion": 1, "name": 3}))
        assert any("name" in d for d in err.value.diagnostics)

    def test_family_times_must_cover_steps(self, fig1a_data):
        del fig1a_data["families"]["arm"]["times"][1]
        with pytest.raises(ParseError) as err:
            parse_document(json.dumps(fig1a_data))
        assert any("must be exactly 1..2" in d for d in err.value.diagnostics)


class TestReportRoundTrip:
    def test_report_json_round_trip(self):
        report = analyze(build_fig1b())
        assert parse_report(emit_report(report)) == report

    def test_parse_report_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_report('{"scenario": 1}')

    def test_report_is_plain_json(self):
        report = analyze(build_fig1b())
        data = json.loads(emit_report(report))
        assert data["scenario"] == "fig1b"
        assert isinstance(data["checks"], list)
        assert AnalysisReport.model_validate(data) == report

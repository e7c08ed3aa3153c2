import logging
import sys

import pytest

from citeinfluence.corpus import parse_record


def ref(i, title="a study of things", year=2000, authors=("Jane Smith",), count=10, self_cite=False, gold=False, **kw):
    return {
        "ref_index": i,
        "title": title,
        "year": year,
        "authors": list(authors),
        "global_cite_count": count,
        "self_cite": self_cite,
        "gold_label": gold,
        **kw,
    }


def record(sections, refs, pid="P1", year=2010, mentions=None, **kw):
    rec = {"version": 1, "paper_id": pid, "year": year, "sections": [], "references": refs, **kw}
    for label, sents in sections:
        if isinstance(sents, str):
            rec["sections"].append({"label": label, "text": sents})
        else:
            rec["sections"].append({"label": label, "sentences": list(sents)})
    if mentions is not None:
        rec["mentions"] = mentions
    return rec


def paper(sections, refs, **kw):
    return parse_record(record(sections, refs, **kw))


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.WARNING)
    yield


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)

import io
import json
import threading

import pytest

from dicomvault.audit import AuditLog, MalformedFilter


@pytest.fixture
def log():
    audit = AuditLog(":memory:")
    yield audit
    audit.close()


def _record(log, **kw):
    defaults = dict(request_url="/dicomweb/studies", status=200, category="RESOURCE",
                    operation="LIST", user_id="u1", username="alice",
                    user_agent="ua/1.0", client_ip="10.0.0.9")
    defaults.update(kw)
    log.record(**defaults)


def test_successful_query_record_fields(log):
    _record(log, parameters={"Modality": "CT"})
    log.flush()
    [rec] = log.query()
    assert rec.status == 200
    assert rec.category == "RESOURCE"
    assert rec.operation == "LIST"
    assert rec.parameters == {"Modality": "CT"}
    assert rec.client_ip == "10.0.0.9"
    assert rec.user_agent == "ua/1.0"


def test_denial_recorded_with_status(log):
    _record(log, status=403)
    log.flush()
    assert log.query(filters={"status": 403})[0].status == 403


def test_burst_of_1000_yields_exactly_1000_ordered_records(log):
    def produce(worker):
        for i in range(250):
            _record(log, request_url=f"/w{worker}/{i}")

    threads = [threading.Thread(target=produce, args=(w,)) for w in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    log.flush()
    assert log.count() == 1000
    rows = log.db.query("SELECT seq, timestamp FROM audit_records ORDER BY seq")
    timestamps = [r["timestamp"] for r in rows]
    assert timestamps == sorted(timestamps)


def test_filter_by_ip(log):
    _record(log, client_ip="1.1.1.1")
    _record(log, client_ip="2.2.2.2")
    log.flush()
    rows = log.query(filters={"client_ip": "1.1.1.1"})
    assert len(rows) == 1 and rows[0].client_ip == "1.1.1.1"


def test_empty_time_range(log):
    _record(log)
    log.flush()
    assert log.query(since=1.0, until=2.0) == []


def test_pagination_disjoint_and_complete(log):
    for i in range(250):
        _record(log, request_url=f"/r/{i}")
    log.flush()
    pages = [log.query(limit=100, offset=o) for o in (0, 100, 200)]
    assert [len(p) for p in pages] == [100, 100, 50]
    seen = [rec.request_url for page in pages for rec in page]
    assert len(set(seen)) == 250


def test_newest_first_ordering(log):
    for i in range(5):
        _record(log, request_url=f"/r/{i}")
    log.flush()
    urls = [r.request_url for r in log.query()]
    assert urls == [f"/r/{i}" for i in reversed(range(5))]


def test_malformed_filters_rejected(log):
    with pytest.raises(MalformedFilter):
        log.query(filters={"nope": "x"})
    with pytest.raises(MalformedFilter):
        log.query(filters={"status": "abc"})
    with pytest.raises(MalformedFilter):
        log.query(since=10.0, until=5.0)


def test_append_only_surface():
    log = AuditLog(":memory:")
    assert not any(name.startswith(("delete", "update", "remove")) for name in dir(log)
                   if not name.startswith("_"))
    log.close()


def test_export_ndjson_round_trips(log):
    _record(log, parameters={"a": "1"})
    _record(log, status=403)
    log.flush()
    buf = io.StringIO()
    assert log.export_ndjson(buf) == 2
    lines = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert lines[0]["parameters"] == {"a": "1"}
    assert lines[1]["status"] == 403


def test_queue_overflow_drops_and_counts():
    log = AuditLog(":memory:", queue_size=1)
    # stall the writer by flooding enqueue from one thread while it drains
    for i in range(200):
        log.record(request_url=f"/r/{i}", status=200)
    log.flush()
    assert log.count() + log.dropped == 200
    log.close()


def test_separate_store_from_operational_data(tmp_path):
    log = AuditLog(tmp_path / "audit.db")
    _record(log)
    log.flush()
    log.close()
    assert (tmp_path / "audit.db").exists()

import csv
import io
import json

import pytest

from pqclab import costmodel as cm
from pqclab import kyber, mceliece, ring
from pqclab.counters import OpCounters


def test_kyber_model():
    assert cm.kyber_model_flops(kyber.KYBER512) == (2048, 4096, 1024)
    assert cm.kyber_model_flops(kyber.KYBER768) == (4608, 9216, 1536)
    assert cm.kyber_model_flops(0) == (0, 0, 0)


def test_mceliece_model():
    kg, enc, dec = cm.mceliece_model_flops(mceliece.MCELIECE348864)
    assert kg == 2 * 3488**3 == 84_871_020_544
    assert enc == dec == 24_332_288
    assert abs(kg / 8.5e10 - 1) < 0.02 and abs(enc / 2.4e7 - 1) < 0.02
    assert cm.mceliece_model_flops(1) == (2, 2, 2)


def test_formulas_positive_and_big_o_cells():
    for f in cm.FORMULAS.values():
        assert f.evaluate(k=2, n=256) > 0
    cells = [cm.FORMULAS[s, op].big_o for op in cm.OPERATIONS for s in ("kyber", "mceliece")]
    assert cells == ["O(k²n)", "O(n³)", "O(k²n)", "O(n²)", "O(kn)", "O(n²)"]


def test_size_tables():
    rows = {(r.level, r.key_bytes, r.ct_bytes) for r in cm.size_table("kyber")}
    assert rows == {("512", 800, 768), ("768", 1184, 1088), ("1024", 1568, 1568)}
    mc = {r.level: r for r in cm.size_table("mceliece")}
    assert (mc["348864"].key_bytes, mc["348864"].ct_bytes_table) == (261_120, 128)
    assert (mc["460896"].key_bytes, mc["460896"].ct_bytes_table) == (524_160, 188)
    assert (mc["6688128"].key_bytes, mc["6688128"].published_key_bytes) == (1_044_992, 1_044_480)
    assert mc["6688128"].ct_bytes_table == 240
    assert "D2" in mc["6688128"].notes and "D2" not in mc["348864"].notes
    assert [r.ct_bytes for r in mc.values()] == [436, 576, 836]
    with pytest.raises(ValueError):
        cm.size_table("rsa")


def test_discrepancy_ledger():
    report = cm.build_report()
    flagged, resolved = report.flagged(), report.resolved()
    assert len(flagged) == 2 and len(resolved) == 1
    assert {d.subject for d in flagged} == {"McEliece ciphertext size convention", "McEliece-6688128 public key size"}
    d2 = next(d for d in flagged if "6688128" in d.subject)
    assert "1,044,992" in d2.computed and "1,044,480" in d2.published and "0.05%" in d2.note
    assert "4096" in resolved[0].computed and "2048" in resolved[0].published


def test_measure_scope():
    assert cm.measure(lambda ops: None).is_zero()
    a = ring.ntt_forward(ring.RingElement.from_list([1] * 256))
    ops = cm.measure(lambda o: ring.poly_mul(a, a, o))
    assert ops.zq_mults > 0 and ops.gf2_word_ops == 0


def test_measure_is_additive():
    p = kyber.KYBER512

    def kg(o):
        return kyber.kyber_keygen(p, bytes(32), o)

    def enc(o):
        pk, _ = kyber.kyber_keygen(p, bytes(32))
        return kyber.kyber_encrypt(pk, bytes(32), bytes(32), o)

    both = cm.measure(lambda o: (kg(o), enc(o)))
    assert both == cm.measure(kg) + cm.measure(enc)


def test_kyber_scaling_is_quadratic():
    res = cm.kyber_keygen_scaling()
    assert res["max_ratio_error"] < 0.05
    assert set(res["counts"]) == {2, 3, 4}


def test_mceliece_scaling_small_sample_runs():
    res = cm.mceliece_keygen_scaling(trials=5)
    assert set(res["mean_word_ops"]) == {16, 32, 64}
    assert res["exponent"] > 2


def test_fit_helpers():
    assert cm.fit_power_law([1, 2, 4], [3, 24, 192]) == pytest.approx(3.0)
    c, err = cm.fit_proportional([1, 2, 3], [2, 4, 6])
    assert c == pytest.approx(2) and err == pytest.approx(0)


def test_report_schema_and_model_rows():
    report = cm.build_report()
    assert len(report.rows) == 18
    text = report.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == cm.CSV_COLUMNS
    data = json.loads(report.to_json())
    assert data["columns"] == list(cm.CSV_COLUMNS) and len(data["rows"]) == 18
    assert len(data["discrepancies"]) == 3
    assert len(cm.build_report(["kyber"], ["768"]).rows) == 3
    with pytest.raises(ValueError):
        cm.build_report(trials=0)


def test_figures():
    report = cm.build_report()
    fig3 = {(s, x): (float(v), float(pv)) for s, x, v, pv in report.figure_rows(3)}
    assert fig3["kyber512", "keygen"] == (2048, 2048)
    assert fig3["kyber512", "encrypt"] == (4096, 4096)
    assert fig3["kyber512", "decrypt"] == (1024, 1024)
    for op in cm.OPERATIONS:
        v, pv = fig3["mceliece348864", op]
        assert abs(v / pv - 1) < 0.02
    fig2 = [row[3] for row in report.figure_rows(2)]
    assert fig2 == [800, 1184, 1568, 261120, 524160, 1044480]
    fig4 = [row[2] for row in report.figure_rows(4)]
    assert fig4 == [768, 1088, 1568, 128, 188, 240]
    with pytest.raises(ValueError):
        report.figure_rows(5)


def test_markdown_contains_tables():
    md = cm.build_report().to_markdown()
    for cell in ("| Key Generation | O(k²n) | O(n³) |", "| Encryption | O(k²n) | O(n²) |", "| Decryption | O(kn) | O(n²) |"):
        assert cell in md
    assert "1,044,992 (published 1,044,480)" in md


def test_measured_report_is_deterministic():
    a = cm.build_report(["kyber"], measured=True, trials=2, seed=b"det")
    b = cm.build_report(["kyber"], measured=True, trials=2, seed=b"det")
    assert a.to_csv(include_wall=False) == b.to_csv(include_wall=False)
    row = a.rows[0]
    assert row.measured_mults == ring.BASEMUL_MULTS * 4 and row.wall_ns > 0


def test_measured_failure_is_recorded_per_level(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("injected")

    monkeypatch.setattr(cm.kyb, "kyber_encrypt", boom)
    report = cm.build_report(["kyber"], ["512"], measured=True)
    assert all("error: injected" in r.notes for r in report.rows)


def test_parallel_bench_identical():
    res = cm.bench_parallel_mul(dim=128, threads=4, repeats=1)
    assert res["identical"] and res["speedup"] > 0


def test_counters_arithmetic():
    a = OpCounters(zq_mults=1, gf2_word_ops=2)
    b = OpCounters(zq_mults=3, ntt_transforms=1)
    assert (a + b).as_dict() == {"zq_mults": 4, "zq_adds": 0, "gf2m_mults": 0, "gf2_word_ops": 2, "ntt_transforms": 1}
    a.merge(b)
    assert a.zq_mults == 4

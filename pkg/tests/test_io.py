from __future__ import annotations

import numpy as np
import pytest

from raussim import Basis, GenModel, ModelKind, build_perfect_lattice, generate_faulty, renormalize
from raussim.cli import EXIT_CONFIG, EXIT_MISMATCH, EXIT_OK, EXIT_PARSE, main
from raussim.errors import ParseError
from raussim.io import (
    dump_lattice,
    dump_plan,
    dump_purified,
    parse_lattice,
    parse_plan,
    parse_purified,
)


@pytest.fixture(scope="module")
def skip_instance():
    return generate_faulty(
        (16, 16, 16),
        GenModel(kind=ModelKind.SKIP_BOND, p_fail=0.3, q_skip=0.4, seed=21),
        box_size=8,
    )


class TestLatticeFormat:
    def test_round_trip_is_byte_identical(self, skip_instance):
        text = dump_lattice(skip_instance)
        again = dump_lattice(parse_lattice(text))
        assert text == again

    def test_counts_recovered(self, skip_instance):
        back = parse_lattice(dump_lattice(skip_instance))
        assert back.realized_bonds == skip_instance.realized_bonds
        assert back.failed_bonds == skip_instance.failed_bonds
        assert back.nonlocal_bonds == skip_instance.nonlocal_bonds
        assert np.array_equal(back.indptr, skip_instance.indptr)
        assert np.array_equal(back.indices, skip_instance.indices)

    def test_header_layout(self, skip_instance):
        first = dump_lattice(skip_instance).splitlines()[0]
        assert first == "lattice 16 16 16 8"

    def test_parse_errors_carry_line_numbers(self):
        with pytest.raises(ParseError) as err:
            parse_lattice("nonsense\n")
        assert err.value.line == 1

        good = dump_lattice(build_perfect_lattice((3, 3, 3)))
        with pytest.raises(ParseError) as err:
            parse_lattice(good + "edge 9,9,9:0 0,0,0:0\n")
        assert err.value.line == len(good.splitlines()) + 1

        lines = good.splitlines()
        lines[1] = lines[1].replace("node", "nod")
        with pytest.raises(ParseError) as err:
            parse_lattice("\n".join(lines) + "\n")
        assert err.value.line == 2

    def test_rejects_inconsistent_address(self):
        good = dump_lattice(build_perfect_lattice((3, 3, 3)))
        assert "node 0,0,1 0 0 0 1" in good  # box size 1: box token is the position
        bad = good.replace("node 0,0,1 0 ", "node 0,0,1 5 ", 1)
        with pytest.raises(ParseError):
            parse_lattice(bad)

    def test_rejects_non_lattice_edge(self):
        good = dump_lattice(build_perfect_lattice((5, 5, 5)))
        # distance-3 pair: (0,0,1) and (0,3,1) are both qubits
        inst = build_perfect_lattice((5, 5, 5))
        tok = lambda pos: f"{pos[0]},{pos[1]},{pos[2]}:0"  # box_size 1: local always 0
        with pytest.raises(ParseError):
            parse_lattice(good + f"edge {tok((0, 0, 1))} {tok((0, 3, 1))}\n")


class TestPurifiedFormat:
    def test_round_trip(self, skip_instance):
        pur, _ = renormalize(generate_faulty((24, 24, 24), GenModel(p_fail=0.25, seed=2),
                                             box_size=8), 8)
        text = dump_purified(pur)
        nodes, bonds = parse_purified(text)
        assert nodes == set(pur.nodes())
        assert len(bonds) == len(pur.records)
        for (c1, c2, status, length), rec in zip(bonds, sorted(pur.records, key=lambda r: r.bond)):
            assert (c1, c2) == rec.bond
            assert status is rec.status
            assert length == rec.length

    def test_parse_rejects_bad_status(self):
        with pytest.raises(ParseError) as err:
            parse_purified("pbond 0,0,0 0,0,1 melted 5\n")
        assert err.value.line == 1


class TestPlanFormat:
    def test_round_trip(self):
        inst = generate_faulty((24, 24, 24), GenModel(p_fail=0.25, seed=2), box_size=8)
        _, plan = renormalize(inst, 8)
        text = dump_plan(inst, plan)
        again = dump_plan(inst, parse_plan(text, inst))
        assert text == again

    def test_coverage_enforced(self):
        inst = build_perfect_lattice((3, 3, 3))
        text = dump_plan(inst, _all_z_plan(inst))
        partial = "\n".join(text.splitlines()[:-1]) + "\n"
        with pytest.raises(ParseError):
            parse_plan(partial, inst)
        with pytest.raises(ParseError):
            parse_plan(text + text.splitlines()[0] + "\n", inst)


def _all_z_plan(inst):
    from raussim import MeasurementPlan

    return MeasurementPlan({inst.node_id(n): Basis.Z for n in range(inst.num_nodes)})


class TestCli:
    def test_pipeline_and_exit_codes(self, tmp_path, capsys):
        lat = tmp_path / "lat.txt"
        pur = tmp_path / "pur.txt"
        plan = tmp_path / "plan.txt"

        assert main(["generate", "--dims", "32", "32", "16", "--box-size", "8",
                     "--p-fail", "0.25", "--seed", "7", "-o", str(lat)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "realized" in out and "failed" in out

        assert main(["renormalize", "-i", str(lat), "--box-size", "8",
                     "-o", str(pur), "--plan", str(plan)]) == EXIT_OK
        assert "output_error_rate" in capsys.readouterr().out

        assert main(["verify", "-i", str(lat), "--plan", str(plan),
                     "--purified", str(pur)]) == EXIT_OK
        assert "verification passed" in capsys.readouterr().out

    def test_verify_detects_flipped_measurement(self, tmp_path, capsys):
        lat = tmp_path / "lat.txt"
        pur = tmp_path / "pur.txt"
        plan = tmp_path / "plan.txt"
        main(["generate", "--dims", "32", "32", "16", "--box-size", "8",
              "--p-fail", "0.25", "--seed", "7", "-o", str(lat)])
        main(["renormalize", "-i", str(lat), "-o", str(pur), "--plan", str(plan)])
        capsys.readouterr()

        lines = plan.read_text().splitlines()
        flipped = next(i for i, l in enumerate(lines) if l.endswith(" Y"))
        lines[flipped] = lines[flipped][:-1] + "Z"
        plan.write_text("\n".join(lines) + "\n")

        assert main(["verify", "-i", str(lat), "--plan", str(plan),
                     "--purified", str(pur)]) == EXIT_MISMATCH
        out = capsys.readouterr().out
        assert "missing bond" in out
        assert "verification FAILED" in out

    def test_empty_purification_verifies(self, tmp_path, capsys):
        # fully failed lattice: no structures, all-Z plan, empty purified graph
        lat = tmp_path / "lat.txt"
        pur = tmp_path / "pur.txt"
        plan = tmp_path / "plan.txt"
        main(["generate", "--dims", "24", "24", "24", "--box-size", "8",
              "--p-fail", "1", "--q-skip", "0", "-o", str(lat)])
        main(["renormalize", "-i", str(lat), "-o", str(pur), "--plan", str(plan)])
        capsys.readouterr()
        assert main(["verify", "-i", str(lat), "--plan", str(plan),
                     "--purified", str(pur)]) == EXIT_OK

    def test_divisibility_rejected(self, tmp_path, capsys):
        lat = tmp_path / "lat.txt"
        main(["generate", "--dims", "41", "40", "24", "-o", str(lat)])
        capsys.readouterr()
        assert main(["renormalize", "-i", str(lat), "--box-size", "20",
                     "-o", str(tmp_path / "p.txt"), "--plan", str(tmp_path / "m.txt")]
                    ) == EXIT_CONFIG

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("lattice 8 8 8\n")  # wrong header arity
        assert main(["renormalize", "-i", str(bad), "--box-size", "8",
                     "-o", str(tmp_path / "p.txt"), "--plan", str(tmp_path / "m.txt")]
                    ) == EXIT_PARSE

    def test_sweep_writes_report(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        assert main(["sweep", "box", "--box-sizes", "6", "--coarse-dims", "2", "2", "2",
                     "--seeds", "2", "-o", str(out)]) == EXIT_OK
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("p_fail,B,seeds,")
        assert len(lines) == 2

    def test_sweep_json(self, tmp_path, capsys):
        import json

        out = tmp_path / "r.json"
        assert main(["sweep", "input", "--p-fails", "0.25", "--box-size", "6",
                     "--coarse-dims", "2", "2", "2", "--seeds", "2",
                     "--format", "json", "-o", str(out)]) == EXIT_OK
        blob = json.loads(out.read_text())
        assert blob["kind"] == "input_error"

    def test_out_dir_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("RAUSSIM_OUT_DIR", str(tmp_path))
        assert main(["generate", "--dims", "8", "8", "8", "--seed", "1"]) == EXIT_OK
        assert (tmp_path / "lattice.txt").exists()

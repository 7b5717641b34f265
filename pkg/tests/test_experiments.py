"""
평가 지표 / 전이 / chain / fgsm / 리포트 출력 테스트
"""

import json
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from src.adversary import Atn, AtnConfig, build_atn, generate, train_atn
from src.autodiff import functional as F
from src.autodiff.optim import Adam
from src.data_io import read_pgm
from src.errors import ContractError
from src.experiments import (
    REPORT_COLUMNS, ChainMode, EvalReport, TransferMatrix, aggregate_reports, chain_frame, emit_report, eval_atn,
    fgsm, fgsm_images, fgsm_report, load_report, load_reports, parallel_chain, rank_diff, rank_diff_batch,
    report_from_scores, save_chain_grid, save_success_grid, score_examples, serial_chain, success_count_histogram,
    success_grid, transfer_eval,
)
from src.networks import build_network, predict_proba

from conftest import TINY_ATN, TINY_CLASSIFIER, synthetic_digits


class IdentityBody:
    """x′ = x 를 내는 본체 (autoencode 모드용 테스트 더블)"""

    def forward(self, x, insider=None):
        return F.as_tensor(x)


def identity_atn(t: int) -> Atn:
    return Atn(AtnConfig(t, 0.01, TINY_ATN), body=IdentityBody())


@pytest.fixture(scope='module')
def trained_atn(trained_tiny_classifier):
    """합성 데이터로 짧게 학습한 ATN_3"""
    atn = build_atn(3, 0.01, [trained_tiny_classifier], body_spec=TINY_ATN, seed=2)
    train_atn(atn, synthetic_digits(200, seed=4).images, steps=80, batch=25, optimizer=Adam(lr=2e-3), log_every=0)
    atn.release_targets()
    return atn


def make_report(**overrides) -> EvalReport:
    values = dict(atn='atn_a', target_class=1, beta=0.001, classifier='classifier_p', n_eval=90,
                  top1_target_rate=0.5, second_conditional=0.75, second_unconditional=0.375,
                  rank_diff_top5=0.25, rank_diff_top9=0.5)
    values.update(overrides)
    return EvalReport(**values)


class TestRankDiff:
    def _pair(self):
        y = np.array([0.02, 0.30, 0.20, 0.15, 0.10, 0.08, 0.06, 0.04, 0.03, 0.02])
        y_prime = y.copy()
        y_prime[[1, 2]] = y_prime[[2, 1]]
        return y / y.sum(), y_prime / y_prime.sum()

    def test_identity_is_zero(self):
        y, _ = self._pair()
        assert rank_diff(y, y, t=0, k=5) == 0.0

    def test_adjacent_swap(self):
        y, y_prime = self._pair()
        assert rank_diff(y, y_prime, t=0, k=5) == pytest.approx(0.4)
        assert rank_diff(y, y_prime, t=0, k=9) == pytest.approx(2 / 9)

    def test_target_class_is_ignored(self):
        y, y_prime = self._pair()
        y_prime = y_prime.copy()
        y_prime[0] = 5.0
        assert rank_diff(y, y_prime / y_prime.sum(), t=0, k=5) == pytest.approx(0.4)

    def test_k_out_of_range(self):
        y, _ = self._pair()
        with pytest.raises(ContractError):
            rank_diff(y, y, t=0, k=10)

    def test_batch_matches_rows(self):
        rng = np.random.default_rng(0)
        y, y_prime = rng.dirichlet(np.ones(10), 6), rng.dirichlet(np.ones(10), 6)
        batch = rank_diff_batch(y, y_prime, 4, 5)
        assert batch == pytest.approx([rank_diff(a, b, 4, 5) for a, b in zip(y, y_prime)])


class TestReportFromScores:
    def _scores(self):
        y = np.eye(10)[[0, 1, 2, 3, 3]] * 0.9 + 0.01
        y_prime = np.full((5, 10), 0.01)
        # 이미지 0, 1 은 목표 3 으로 성공하고 원래 클래스가 2위로 남음, 이미지 2 는 실패
        y_prime[0, [3, 0]] = [0.8, 0.11]
        y_prime[1, [3, 1]] = [0.8, 0.11]
        y_prime[2, [2, 5]] = [0.8, 0.11]
        y_prime[3:, [3, 7]] = [0.8, 0.11]
        return score_examples(y, y_prime, t=3)

    def test_exclusion_and_rates(self):
        report = report_from_scores(self._scores(), 'atn_a', 0.01, 3, 'clf')
        assert report.n_eval == 3
        assert report.top1_target_rate == pytest.approx(2 / 3)
        assert report.second_conditional == pytest.approx(1.0)
        assert report.second_unconditional == pytest.approx(2 / 3)

    def test_definition_algebra(self):
        report = report_from_scores(self._scores(), 'atn_a', 0.01, 3, 'clf')
        assert report.second_unconditional == pytest.approx(report.top1_target_rate * report.second_conditional)

    def test_everything_excluded(self):
        scores = score_examples(np.eye(10)[[3, 3]] * 0.9 + 0.01, np.full((2, 10), 0.1), t=3)
        with pytest.raises(ContractError):
            report_from_scores(scores, 'atn_a', 0.01, 3, 'clf')

    def test_no_successes(self):
        y = np.eye(10)[[0, 1]] * 0.9 + 0.01
        report = report_from_scores(score_examples(y, y, t=5), 'atn_a', 0.01, 5, 'clf')
        assert report.top1_target_rate == 0.0
        assert report.second_conditional == 0.0
        assert np.isnan(report.rank_diff_top5)


class TestEvalAtn:
    def test_identity_atn_never_succeeds(self, trained_tiny_classifier, digits_test):
        report = eval_atn(identity_atn(4), trained_tiny_classifier, digits_test)
        original = predict_proba(trained_tiny_classifier, digits_test.images).argmax(axis=1)
        assert report.n_eval == int((original != 4).sum())
        assert report.top1_target_rate == 0.0
        assert report.atn == 'atn_tiny'

    def test_trained_atn_report_invariants(self, trained_atn, trained_tiny_classifier, digits_test):
        report = eval_atn(trained_atn, trained_tiny_classifier, digits_test, batch=30)
        for value in (report.top1_target_rate, report.second_conditional, report.second_unconditional):
            assert 0.0 <= value <= 1.0
        assert report.second_unconditional <= report.top1_target_rate + 1e-12
        assert report.second_unconditional <= report.second_conditional + 1e-12
        assert report.second_unconditional == pytest.approx(report.top1_target_rate * report.second_conditional)
        assert set(report.examples) <= set(range(10))

    def test_unfrozen_classifier_rejected(self, digits_test):
        with pytest.raises(ContractError):
            eval_atn(identity_atn(1), build_network(TINY_CLASSIFIER), digits_test)


class TestTransfer:
    def test_training_target_matches_eval_atn(self, trained_atn, trained_tiny_classifier, digits_test):
        other = build_network(TINY_CLASSIFIER.with_seed(21)).freeze()
        row = transfer_eval(trained_atn, [trained_tiny_classifier, other], digits_test)
        direct = eval_atn(trained_atn, trained_tiny_classifier, digits_test)
        np.testing.assert_equal(row.reports[0].to_row(), direct.to_row())
        assert [r.classifier for r in row.reports] == ['classifier_tiny', 'classifier_tiny']

    def test_matrix_and_histogram(self, trained_atn, trained_tiny_classifier, digits_test):
        other = build_network(replace(TINY_CLASSIFIER, name='classifier_other', seed=21)).freeze()
        row = transfer_eval(trained_atn, [trained_tiny_classifier, other], digits_test)

        matrix = TransferMatrix(['classifier_tiny', 'classifier_other'])
        matrix.add_row(row)
        assert matrix.is_complete()
        assert matrix.atns == ['atn_tiny_t3']
        assert matrix.to_frame().shape == (1, 2)
        assert len(matrix.reports()) == 2

        hist = success_count_histogram(row)
        assert len(hist) == 3
        assert hist.sum() == int(row.eligible.sum())
        assert success_count_histogram(row, ['classifier_other']).sum() == int(row.eligible.sum())
        with pytest.raises(ContractError):
            success_count_histogram(row, ['classifier_missing'])

    def test_matrix_rejects_wrong_columns(self, trained_atn, trained_tiny_classifier, digits_test):
        row = transfer_eval(trained_atn, [trained_tiny_classifier], digits_test)
        with pytest.raises(ContractError):
            TransferMatrix(['classifier_tiny', 'classifier_p']).add_row(row)

    def test_insider_needs_source(self, trained_tiny_classifier, digits_test):
        atn = build_atn(2, 0.01, [trained_tiny_classifier], architecture='a', insider=True)
        with pytest.raises(ContractError):
            transfer_eval(atn, [trained_tiny_classifier], digits_test)


class TestChain:
    def test_identity_atns_never_succeed_on_all_ten(self, trained_tiny_classifier, digits_test):
        atns = [identity_atn(t) for t in range(10)]
        images = digits_test.images[:20]
        for chain in (parallel_chain, serial_chain):
            report = chain(atns, trained_tiny_classifier, images, batch=7)
            assert report.masks.shape == (20, 10)
            assert report.all10_count == 0 == report.histogram[10]
            assert report.histogram.sum() == 20
            assert report.histogram[1] == 20

    def test_serial_outputs_stay_in_range(self, trained_atn, trained_tiny_classifier, digits_test):
        atns = [identity_atn(t) for t in range(10)]
        atns[3] = trained_atn
        report = serial_chain(atns, trained_tiny_classifier, digits_test.images[:15])
        assert report.mode == ChainMode.SERIAL
        assert len(report.outputs) == 10
        assert all(np.all(np.abs(step) <= 1.0) for step in report.outputs)
        assert report.histogram.sum() == report.n_images == 15
        assert report.per_step_rate().shape == (10,)

    @pytest.mark.parametrize('targets', [list(range(9)), [1, 0, 2, 3, 4, 5, 6, 7, 8, 9]])
    def test_needs_ten_atns_in_order(self, trained_tiny_classifier, digits_test, targets):
        with pytest.raises(ContractError):
            parallel_chain([identity_atn(t) for t in targets], trained_tiny_classifier, digits_test.images[:2])

    def test_chain_frame_and_grid(self, tmp_path, trained_tiny_classifier, digits_test):
        atns = [identity_atn(t) for t in range(10)]
        images = digits_test.images[:3]
        reports = {mode: fn(atns, trained_tiny_classifier, images)
                   for mode, fn in (('parallel', parallel_chain), ('serial', serial_chain))}
        frame = chain_frame(reports)
        assert list(frame.index) == list(range(11))
        assert list(frame.columns) == ['parallel', 'serial']
        grid = read_pgm(save_chain_grid(reports['serial'], images, tmp_path / 'chain.pgm'))
        assert grid.shape == (3 * 28, 11 * 28)


class TestFgsm:
    def test_zero_eps_is_identity(self, trained_tiny_classifier, digits_test):
        x = digits_test.images[:5]
        np.testing.assert_array_equal(fgsm(trained_tiny_classifier, x, 2, 0.0), x)

    def test_step_is_bounded(self, trained_tiny_classifier, digits_test):
        x = digits_test.images[:10]
        x_prime = fgsm_images(trained_tiny_classifier, x, 2, 0.1, batch=4)
        assert np.max(np.abs(x_prime - x)) <= 0.1 + 1e-6
        assert np.all(np.abs(x_prime) <= 1.0)

    def test_step_raises_target_probability(self, trained_tiny_classifier, digits_test):
        x = digits_test.images[:30]
        before = predict_proba(trained_tiny_classifier, x)[:, 6].mean()
        after = predict_proba(trained_tiny_classifier, fgsm(trained_tiny_classifier, x, 6, 0.05))[:, 6].mean()
        assert after > before

    def test_negative_eps(self, trained_tiny_classifier, digits_test):
        with pytest.raises(ContractError):
            fgsm(trained_tiny_classifier, digits_test.images[:1], 2, -0.1)

    def test_unfrozen_classifier_keeps_no_grad(self, tiny_classifier, digits_test):
        fgsm(tiny_classifier, digits_test.images[:3], 2, 0.1)
        assert all(p.grad is None for p in tiny_classifier.parameters().values())

    def test_report_uses_eps_column(self, trained_tiny_classifier, digits_test):
        report = fgsm_report(trained_tiny_classifier, digits_test, 5, eps=0.2)
        assert report.atn == 'fgsm' and report.beta == 0.2


class TestReports:
    HEADER = 'atn,target_class,beta,classifier,n_eval,top1,second_cond,second_uncond,rankdiff5,rankdiff9'

    def test_single_report_csv(self, tmp_path):
        text = emit_report([make_report()], tmp_path / 'r.csv').read_text()
        lines = text.splitlines()
        assert lines[0] == self.HEADER
        assert lines[1] == 'atn_a,1,0.0010,classifier_p,90,0.5000,0.7500,0.3750,0.2500,0.5000'
        assert len(lines) == 2

    def test_identical_inputs_identical_bytes(self, tmp_path):
        reports = [make_report(target_class=t, classifier=c) for t in (2, 0, 1) for c in ('b', 'a')]
        for fmt in ('csv', 'json'):
            a = emit_report(reports, tmp_path / f'a.{fmt}', fmt).read_bytes()
            b = emit_report(list(reversed(reports)), tmp_path / f'b.{fmt}', fmt).read_bytes()
            assert a == b

    def test_json_round_trip(self, tmp_path):
        reports = [make_report(target_class=t) for t in range(3)]
        path = emit_report(reports, tmp_path / 'r.json', 'json')
        assert load_reports(path) == reports
        assert list(json.loads(path.read_text())[0]) == REPORT_COLUMNS

    def test_nan_becomes_null(self, tmp_path):
        path = emit_report([make_report(rank_diff_top5=float('nan'))], tmp_path / 'r.json', 'json')
        assert json.loads(path.read_text())[0]['rankdiff5'] is None
        assert np.isnan(load_reports(path)[0].rank_diff_top5)

    def test_bad_inputs(self, tmp_path):
        with pytest.raises(ContractError):
            emit_report([], tmp_path / 'r.csv')
        with pytest.raises(ContractError):
            emit_report([make_report()], tmp_path / 'r.xml', 'xml')

    def test_aggregate_averages_over_targets(self, tmp_path):
        reports = [make_report(target_class=0, top1_target_rate=0.2, n_eval=10),
                   make_report(target_class=1, top1_target_rate=0.6, n_eval=20)]
        summary = aggregate_reports(reports)
        assert len(summary) == 1
        assert summary.loc[0, 'target_class'] == 'all'
        assert summary.loc[0, 'n_eval'] == 30
        assert summary.loc[0, 'top1'] == pytest.approx(0.4)

        path = emit_report(pd.concat([summary, pd.DataFrame([r.to_row() for r in reports])]), tmp_path / 'mix.csv')
        assert len(load_report(path)) == 3
        assert [r.target_class for r in load_reports(path)] == [0, 1]

    def test_success_grid_layout(self, tmp_path):
        image = np.zeros((28, 28, 1), dtype=np.float32)
        report = make_report(target_class=7)
        report.examples = {3: image}
        cells = success_grid([report])
        assert len(cells) == 100
        assert cells[73] is image
        assert sum(c is not None for c in cells) == 1
        assert read_pgm(save_success_grid([report], tmp_path / 'g.pgm')).shape == (280, 280)


def test_generated_examples_reused_for_grid(trained_atn, trained_tiny_classifier, digits_test):
    report = eval_atn(trained_atn, trained_tiny_classifier, digits_test)
    x_prime = generate(trained_atn, digits_test.images)
    for original, image in report.examples.items():
        matches = [i for i in range(len(digits_test)) if digits_test.labels[i] == original
                   and np.array_equal(x_prime[i], image)]
        assert matches

"""
실제 MNIST 로 전체 실험을 재현하는 인수(acceptance) 테스트

ATNFORGE_DATA 아래에 MNIST IDX 파일이 있을 때만 실행됩니다.
CPU 기준 수 시간이 걸립니다:

    ATNFORGE_DATA=/data/mnist pytest -m slow tests/test_acceptance.py
"""

import pandas as pd
import pytest

from config.settings import ROOT_DIR
from src.main import main

from conftest import real_mnist_available

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(not real_mnist_available(), reason='MNIST IDX 파일이 없습니다 (ATNFORGE_DATA)'),
]

CONFIGS = ROOT_DIR / 'configs'
UNSEEN = ['classifier_a0', 'classifier_a1', 'classifier_a2', 'classifier_a3']


def run(command: str, config: str, out) -> None:
    assert main([command, '--config', str(CONFIGS / config), '--out', str(out), '--threads', '4']) == 0


@pytest.fixture(scope='module')
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp('mnist')
    run('train-classifier', 'classifiers.ini', out)
    return out


def transfer_matrix(run_dir, label: str) -> pd.DataFrame:
    return pd.read_csv(run_dir / 'reports' / f'transfer_{label}_beta0.005_matrix.csv', index_col='atn')


@pytest.fixture(scope='module')
def single_target_transfer(run_dir) -> pd.Series:
    """classifier_p 로만 학습한 ATN_b 의 분류기별 평균 성공률"""
    run('train-atn', 'transfer.ini', run_dir)
    run('transfer', 'transfer.ini', run_dir)
    return transfer_matrix(run_dir, 'atn_b').loc['mean']


def test_classifier_accuracy(run_dir):
    for name in ['classifier_p', *UNSEEN]:
        log = pd.read_csv(run_dir / 'logs' / f'{name}_train.csv')
        assert log['test_accuracy'].iloc[-1] >= 0.98, name


def test_atn_a_success_and_second_place(run_dir):
    run('train-atn', 'atn_sweep.ini', run_dir)
    run('eval', 'atn_sweep.ini', run_dir)

    summary = pd.read_csv(run_dir / 'reports' / 'eval_summary.csv')
    atn_a = summary[summary['atn'] == 'atn_a'].set_index('beta').sort_index(ascending=False)
    top1 = atn_a['top1'].tolist()
    assert top1 == sorted(top1)
    assert atn_a.loc[0.001, 'top1'] >= 0.85
    assert atn_a.loc[0.001, 'second_cond'] >= 0.85


def test_transfer_gap_and_rank_difference(run_dir, single_target_transfer):
    mean = single_target_transfer
    assert all(mean['classifier_p'] - mean[name] >= 0.40 for name in UNSEEN)

    rows = pd.read_csv(run_dir / 'reports' / 'transfer_atn_b_beta0.005.csv')
    assert rows.loc[rows['classifier'] == 'classifier_p', 'rankdiff5'].mean() <= 2.0


def test_multi_target_training(run_dir, single_target_transfer):
    run('train-atn', 'multi_target.ini', run_dir)
    run('transfer', 'multi_target.ini', run_dir)

    multi = transfer_matrix(run_dir, 'atn_b_multi3').loc['mean']
    assert all(multi[name] >= 0.60 for name in ('classifier_p', 'classifier_a1', 'classifier_a2'))

    single = single_target_transfer
    assert all(multi[name] > single[name] for name in ('classifier_a0', 'classifier_a3'))


def test_serial_chain_beats_parallel(run_dir):
    run('train-atn', 'chain.ini', run_dir)
    run('chain', 'chain.ini', run_dir)

    chain = pd.read_csv(run_dir / 'reports' / 'chain.csv', index_col='successes')
    assert chain.loc[10, 'serial'] >= chain.loc[10, 'parallel']

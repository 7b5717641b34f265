"""
실험 모듈
src/experiments/__init__.py

목표 공격 성공률 / 2위 보존 / 순위 변화량 평가, 전이 행렬, 병렬·직렬 chain,
fgsm 기준선, 리포트 출력을 제공합니다.
"""

from .chain import ChainMode, ChainReport, parallel_chain, serial_chain
from .fgsm import fgsm, fgsm_images, fgsm_report
from .metrics import (
    REPORT_COLUMNS, EvalReport, ExampleScores, aggregate_reports, eval_atn, rank_diff, rank_diff_batch,
    report_from_scores, score_classifier, score_examples,
)
from .reports import (
    chain_frame, emit_report, load_report, load_reports, save_chain_grid, save_success_grid, success_grid,
)
from .transfer import TransferMatrix, TransferRow, success_count_histogram, transfer_eval

__all__ = [
    'EvalReport', 'ExampleScores', 'REPORT_COLUMNS', 'eval_atn', 'score_examples', 'score_classifier',
    'report_from_scores', 'rank_diff', 'rank_diff_batch', 'aggregate_reports',
    'TransferMatrix', 'TransferRow', 'transfer_eval', 'success_count_histogram',
    'ChainMode', 'ChainReport', 'parallel_chain', 'serial_chain',
    'fgsm', 'fgsm_images', 'fgsm_report',
    'emit_report', 'load_report', 'load_reports', 'success_grid', 'save_success_grid',
    'save_chain_grid', 'chain_frame',
]

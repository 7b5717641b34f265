"""
src/experiments/transfer.py

전이(transfer) 평가: 한 분류기에 대해 학습한 ATN 의 x′ 를 다른 분류기에 그대로 적용
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import EVALUATION
from src.adversary.atn import Atn, generate
from src.data_io.mnist import LabeledDataset
from src.errors import ContractError
from src.experiments.metrics import EvalReport, require_frozen, report_from_scores, score_examples
from src.networks.network import Network, predict_proba

logger = logging.getLogger(__name__)


@dataclass
class TransferRow:
    """ATN 하나 x 분류기 여러 개"""
    atn: str
    target_class: int
    reports: List[EvalReport]
    # 분류기 이름 -> 이미지별 성공 여부 (제외된 이미지는 False)
    success: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    # 모든 분류기에서 제외되지 않은 이미지
    eligible: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def key(self) -> str:
        return f"{self.atn}_t{self.target_class}"


@dataclass
class TransferMatrix:
    """행: ATN, 열: 분류기, 셀: EvalReport"""
    classifiers: List[str]
    cells: Dict[Tuple[str, str], EvalReport] = field(default_factory=dict)
    rows: List[TransferRow] = field(default_factory=list)

    def add_row(self, row: TransferRow) -> None:
        names = [r.classifier for r in row.reports]
        if sorted(names) != sorted(self.classifiers):
            raise ContractError(f"{row.atn}: 분류기 집합 {names} 이 행렬 열 {self.classifiers} 와 다릅니다")
        self.rows.append(row)
        for report in row.reports:
            self.cells[(row.key, report.classifier)] = report

    @property
    def atns(self) -> List[str]:
        return [row.key for row in self.rows]

    def is_complete(self) -> bool:
        return all((a, c) in self.cells for a in self.atns for c in self.classifiers)

    def to_frame(self, metric: str = 'top1_target_rate') -> pd.DataFrame:
        """metric 값의 ATN x 분류기 pivot 표"""
        data = {c: [getattr(self.cells[(a, c)], metric) for a in self.atns] for c in self.classifiers}
        return pd.DataFrame(data, index=pd.Index(self.atns, name='atn'), columns=self.classifiers)

    def reports(self) -> List[EvalReport]:
        return [self.cells[(a, c)] for a in self.atns for c in self.classifiers]


def transfer_eval(atn: Atn, classifiers: Sequence[Network], data: LabeledDataset,
                  batch: int = EVALUATION['BATCH'], insider_source: Optional[Network] = None,
                  label: Optional[str] = None) -> TransferRow:
    """x′ 를 한 번만 생성해 모든 분류기에서 재사용"""
    require_frozen(classifiers)
    if not classifiers:
        raise ContractError("전이 평가할 분류기가 없습니다")
    if atn.config.insider and insider_source is None:
        raise ContractError(f"{atn.name}: insider ATN 전이 평가에는 활성값을 낼 분류기가 필요합니다")

    label = label or atn.config.body_spec.name
    x_prime = generate(atn, data.images, insider_source=insider_source, batch=batch)
    reports, success = [], {}
    eligible = np.ones(len(data), dtype=bool)

    for net in classifiers:
        y = predict_proba(net, data.images, batch).astype(np.float64)
        y_prime = predict_proba(net, x_prime, batch).astype(np.float64)
        scores = score_examples(y, y_prime, atn.target_class)
        reports.append(report_from_scores(scores, label, atn.config.beta, atn.target_class,
                                          net.name, x_prime, data.labels))
        success[net.name] = scores.counted & scores.success
        eligible &= scores.counted

    summary = ', '.join(f"{r.classifier}={r.top1_target_rate:.1%}" for r in reports)
    logger.info(f"🔁 {label}_t{atn.target_class} 전이: {summary}")
    return TransferRow(label, atn.target_class, reports, success, eligible)


def success_count_histogram(row: TransferRow, classifiers: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    이미지별로 속인 분류기 수의 히스토그램

    모든 분류기에서 평가 대상인 이미지만 셉니다. 반환 길이 = 분류기 수 + 1.
    classifiers 로 학습 대상 / 미학습 분류기 그룹을 나눠 볼 수 있습니다.
    """
    names = list(classifiers) if classifiers is not None else list(row.success)
    missing = [n for n in names if n not in row.success]
    if missing:
        raise ContractError(f"{row.atn}: 전이 결과에 없는 분류기입니다: {missing}")
    if not names:
        raise ContractError(f"{row.atn}: 히스토그램을 만들 분류기가 없습니다")
    eligible = row.eligible if row.eligible is not None else np.ones_like(row.success[names[0]])
    fooled = np.stack([row.success[n] for n in names], axis=1)[eligible].sum(axis=1)
    return np.bincount(fooled, minlength=len(names) + 1).astype(np.int64)

"""
src/experiments/metrics.py

ATN 평가 지표

🎯 핵심 목표:
- top-1 목표 성공률 (원래 argmax == t 인 이미지는 제외)
- 2위 보존율: 성공 조건부 / 결합(joint) 비율
- 순위 변화량 (목표 클래스 제외 상위 5 / 9 클래스)
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config.settings import EVALUATION
from src.adversary.atn import Atn, generate
from src.data_io.mnist import LabeledDataset
from src.errors import ContractError
from src.networks.network import Network, predict_proba

logger = logging.getLogger(__name__)

# 리포트 파일 컬럼 순서 (EvalReport 필드명 -> 파일 컬럼명)
REPORT_FIELDS = {
    'atn': 'atn',
    'target_class': 'target_class',
    'beta': 'beta',
    'classifier': 'classifier',
    'n_eval': 'n_eval',
    'top1_target_rate': 'top1',
    'second_conditional': 'second_cond',
    'second_unconditional': 'second_uncond',
    'rank_diff_top5': 'rankdiff5',
    'rank_diff_top9': 'rankdiff9',
}
REPORT_COLUMNS = list(REPORT_FIELDS.values())


@dataclass
class EvalReport:
    """(ATN, 분류기) 한 쌍의 평가 결과"""
    atn: str
    target_class: int
    beta: float
    classifier: str
    n_eval: int
    top1_target_rate: float
    second_conditional: float
    second_unconditional: float
    rank_diff_top5: float
    rank_diff_top9: float
    # 원래 클래스(라벨)별 첫 성공 x′, 격자 이미지용
    examples: Dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def to_row(self) -> Dict:
        return {column: getattr(self, name) for name, column in REPORT_FIELDS.items()}

    @classmethod
    def from_row(cls, row: Dict) -> 'EvalReport':
        kwargs = {name: row[column] for name, column in REPORT_FIELDS.items()}
        kwargs['target_class'] = int(kwargs['target_class'])
        kwargs['n_eval'] = int(kwargs['n_eval'])
        for name in ('beta', 'top1_target_rate', 'second_conditional', 'second_unconditional',
                     'rank_diff_top5', 'rank_diff_top9'):
            value = kwargs[name]
            kwargs[name] = float('nan') if value is None else float(value)
        return cls(**kwargs)


@dataclass
class ExampleScores:
    """이미지별 판정 (모두 길이 N)"""
    counted: np.ndarray        # argmax f(x) != t
    success: np.ndarray        # argmax f(x′) == t
    second_kept: np.ndarray    # 2위(f(x′)) == argmax f(x)
    rank_diff_top5: np.ndarray
    rank_diff_top9: np.ndarray


def _descending_order(p: np.ndarray) -> np.ndarray:
    """확률 내림차순 클래스 순서 (동점은 낮은 번호 먼저)"""
    return np.argsort(-p, axis=-1, kind='stable')


def rank_diff_batch(y: np.ndarray, y_prime: np.ndarray, t: int, k: int) -> np.ndarray:
    """행 단위 rank_diff"""
    y, y_prime = np.atleast_2d(y), np.atleast_2d(y_prime)
    if y.shape != y_prime.shape:
        raise ContractError(f"y {y.shape} 와 y′ {y_prime.shape} shape 가 다릅니다")
    n, classes = y.shape
    if not 1 <= k <= classes - 1:
        raise ContractError(f"k 는 1~{classes - 1} 이어야 합니다: {k}")

    others = np.delete(np.arange(classes), t)
    before = _descending_order(y[:, others])
    after = _descending_order(y_prime[:, others])

    rows = np.arange(n)[:, None]
    rank_after = np.empty_like(after)
    rank_after[rows, after] = np.arange(classes - 1)
    top = before[:, :k]
    return np.abs(np.arange(k) - rank_after[rows, top]).mean(axis=1)


def rank_diff(y, y_prime, t: int, k: int) -> float:
    """
    목표 클래스 t 를 뺀 나머지 클래스의 순위 변화량

    원래 y 의 상위 k 클래스 각각에 대해 |rank_y - rank_y′| 를 평균합니다.
    """
    return float(rank_diff_batch(np.asarray(y, dtype=np.float64),
                                 np.asarray(y_prime, dtype=np.float64), t, k)[0])


def second_choice(p: np.ndarray) -> np.ndarray:
    return _descending_order(p)[:, 1]


def score_examples(y: np.ndarray, y_prime: np.ndarray, t: int) -> ExampleScores:
    """원본/변환 확률 행렬 -> 이미지별 판정"""
    original = y.argmax(axis=1)
    return ExampleScores(
        counted=original != t,
        success=y_prime.argmax(axis=1) == t,
        second_kept=second_choice(y_prime) == original,
        rank_diff_top5=rank_diff_batch(y, y_prime, t, 5),
        rank_diff_top9=rank_diff_batch(y, y_prime, t, 9),
    )


def _mean_or_nan(values: np.ndarray) -> float:
    return float(values.mean()) if values.size else float('nan')


def report_from_scores(scores: ExampleScores, atn_label: str, beta: float, t: int, classifier: str,
                       x_prime: Optional[np.ndarray] = None,
                       labels: Optional[np.ndarray] = None) -> EvalReport:
    """
    제외 규칙 적용 후 비율 계산

    순위 변화량은 성공한 예제만 평균하며, 성공이 없으면 NaN 입니다.
    """
    counted = scores.counted
    n_eval = int(counted.sum())
    if n_eval == 0:
        raise ContractError(f"{atn_label} vs {classifier}: 제외 후 평가할 이미지가 없습니다 (t={t})")

    success = scores.success[counted]
    kept = scores.second_kept[counted]
    n_success = int(success.sum())
    joint = success & kept

    examples: Dict[int, np.ndarray] = {}
    if x_prime is not None and labels is not None:
        hits = np.flatnonzero(scores.counted & scores.success)
        for i in hits:
            examples.setdefault(int(labels[i]), x_prime[i])

    return EvalReport(
        atn=atn_label,
        target_class=int(t),
        beta=float(beta),
        classifier=classifier,
        n_eval=n_eval,
        top1_target_rate=n_success / n_eval,
        second_conditional=int(joint.sum()) / n_success if n_success else 0.0,
        second_unconditional=int(joint.sum()) / n_eval,
        rank_diff_top5=_mean_or_nan(scores.rank_diff_top5[counted][success]),
        rank_diff_top9=_mean_or_nan(scores.rank_diff_top9[counted][success]),
        examples=examples,
    )


def require_frozen(classifiers: Sequence[Network]) -> None:
    unfrozen = [net.name for net in classifiers if not net.frozen]
    if unfrozen:
        raise ContractError(f"평가 대상 분류기는 frozen 이어야 합니다: {unfrozen}")


def eval_atn(atn: Atn, classifier: Network, data: LabeledDataset, batch: int = EVALUATION['BATCH'],
             insider_source: Optional[Network] = None, label: Optional[str] = None) -> EvalReport:
    """
    테스트셋에서 ATN_t 의 목표 공격 성공률 평가

    insider ATN 은 insider_source (기본: 평가 분류기) 의 활성값을 사용합니다.
    """
    require_frozen([classifier])
    source = (insider_source or classifier) if atn.config.insider else None
    x_prime = generate(atn, data.images, insider_source=source, batch=batch)
    report = score_classifier(classifier, data, x_prime, atn.target_class,
                              label or atn.config.body_spec.name, atn.config.beta, batch)
    logger.info(
        f"📊 {report.atn} t={report.target_class} beta={report.beta} vs {report.classifier}: "
        f"top1={report.top1_target_rate:.2%} second={report.second_conditional:.2%} (n={report.n_eval})"
    )
    return report


def score_classifier(classifier: Network, data: LabeledDataset, x_prime: np.ndarray, t: int,
                     atn_label: str, beta: float, batch: int = EVALUATION['BATCH']) -> EvalReport:
    """이미 생성된 x′ 를 분류기 하나로 채점"""
    y = predict_proba(classifier, data.images, batch).astype(np.float64)
    y_prime = predict_proba(classifier, x_prime, batch).astype(np.float64)
    scores = score_examples(y, y_prime, t)
    return report_from_scores(scores, atn_label, beta, t, classifier.name, x_prime, data.labels)


def aggregate_reports(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """
    ATN_{0-9} 평균: (atn, beta, classifier) 별로 목표 클래스를 평균한 표

    target_class 컬럼은 'all', n_eval 은 합계입니다.
    """
    if not reports:
        raise ContractError("집계할 리포트가 없습니다")
    df = pd.DataFrame([r.to_row() for r in reports], columns=REPORT_COLUMNS)
    metrics = ['top1', 'second_cond', 'second_uncond', 'rankdiff5', 'rankdiff9']
    grouped = df.groupby(['atn', 'beta', 'classifier'], sort=True)
    summary = grouped[metrics].mean()
    summary['n_eval'] = grouped['n_eval'].sum()
    summary = summary.reset_index()
    summary['target_class'] = 'all'
    return summary[REPORT_COLUMNS]


def reports_to_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=REPORT_COLUMNS)


def frame_to_reports(df: pd.DataFrame) -> List[EvalReport]:
    df = df.astype(object).where(pd.notna(df), None)
    return [EvalReport.from_row(row) for row in df.to_dict(orient='records')]

"""
src/experiments/reports.py

평가 리포트 CSV/JSON 출력과 성공 예제 격자 이미지
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config.settings import EVALUATION, NUM_CLASSES
from src.data_io.pgm import save_image_grid
from src.errors import ContractError
from src.experiments.chain import ChainReport
from src.experiments.metrics import REPORT_COLUMNS, EvalReport, frame_to_reports, reports_to_frame

logger = logging.getLogger(__name__)

REPORT_FORMATS = ('csv', 'json')

ReportsLike = Union[Sequence[EvalReport], pd.DataFrame]


def _as_frame(reports: ReportsLike) -> pd.DataFrame:
    if isinstance(reports, pd.DataFrame):
        df = reports.copy()
    else:
        df = reports_to_frame(list(reports))
    if df.empty:
        raise ContractError("출력할 리포트가 없습니다")
    missing = [c for c in REPORT_COLUMNS if c not in df.columns]
    if missing:
        raise ContractError(f"리포트 컬럼 누락: {missing}")
    df = df[REPORT_COLUMNS]
    # 'all' 같은 문자열이 섞여도 정렬 가능하도록
    order = df.assign(_t=df['target_class'].astype(str)).sort_values(
        ['atn', 'beta', 'classifier', '_t'], kind='mergesort').index
    return df.loc[order].reset_index(drop=True)


def emit_report(reports: ReportsLike, path: Union[str, Path], fmt: str = 'csv') -> Path:
    """
    리포트 파일 쓰기 (컬럼 순서 고정, 정렬 결정적, 소수 4자리)

    Args:
        reports: EvalReport 목록 또는 aggregate_reports() 결과
        fmt: 'csv' | 'json'
    """
    if fmt not in REPORT_FORMATS:
        raise ContractError(f"지원하지 않는 리포트 형식: {fmt} ({'|'.join(REPORT_FORMATS)})")
    df = _as_frame(reports)
    decimals = EVALUATION['DECIMALS']
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if fmt == 'csv':
        df.to_csv(path, index=False, float_format=f'%.{decimals}f', lineterminator='\n')
    else:
        records = []
        for row in df.to_dict(orient='records'):
            record = {}
            for key, value in row.items():
                if isinstance(value, (float, np.floating)):
                    value = None if np.isnan(value) else round(float(value), decimals)
                elif isinstance(value, np.integer):
                    value = int(value)
                record[key] = value
            records.append(record)
        path.write_text(json.dumps(records, indent=2, ensure_ascii=False) + '\n', encoding='utf-8')

    logger.info(f"📝 리포트 저장: {path} ({len(df)} rows)")
    return path


def load_report(path: Union[str, Path]) -> pd.DataFrame:
    """emit_report 로 쓴 CSV/JSON -> DataFrame"""
    path = Path(path)
    if path.suffix == '.json':
        df = pd.DataFrame(json.loads(path.read_text(encoding='utf-8')))
    else:
        df = pd.read_csv(path, dtype={'target_class': str, 'atn': str, 'classifier': str})
    df['target_class'] = [int(v) if str(v).lstrip('-').isdigit() else v for v in df['target_class']]
    return df[REPORT_COLUMNS]


def load_reports(path: Union[str, Path]) -> List[EvalReport]:
    """ATN별 행만 EvalReport 로 복원 (집계 행 제외)"""
    df = load_report(path)
    df = df[df['target_class'].map(lambda v: isinstance(v, (int, np.integer)))]
    return frame_to_reports(df)


def success_grid(reports: Sequence[EvalReport]) -> List[Optional[np.ndarray]]:
    """
    성공 예제 10×10 격자 셀 (row-major)

    행 = 목표 클래스, 열 = 원래 클래스. 예제가 없는 칸은 None (검은색).
    """
    cells: List[Optional[np.ndarray]] = [None] * (NUM_CLASSES * NUM_CLASSES)
    for report in reports:
        for original, image in report.examples.items():
            cells[report.target_class * NUM_CLASSES + original] = image
    return cells


def save_success_grid(reports: Sequence[EvalReport], path: Union[str, Path]) -> Path:
    return save_image_grid(success_grid(reports), NUM_CLASSES, NUM_CLASSES, path)


def save_chain_grid(report: ChainReport, images: np.ndarray, path: Union[str, Path],
                    n_images: int = NUM_CLASSES) -> Path:
    """행 = 이미지, 열 0 = 원본, 열 k+1 = ATN_k 단계 출력"""
    n = min(n_images, len(images))
    cells = []
    for i in range(n):
        cells.append(images[i])
        cells.extend(step[i] for step in report.outputs)
    return save_image_grid(cells, max(n, 1), NUM_CLASSES + 1, path)


def chain_frame(reports: Dict[str, ChainReport]) -> pd.DataFrame:
    """모드별 k-성공 히스토그램 표 (index: k = 0..10)"""
    data = {mode: report.histogram for mode, report in reports.items()}
    df = pd.DataFrame(data, index=pd.RangeIndex(NUM_CLASSES + 1, name='successes'))
    logger.debug(f"chain 히스토그램:\n{df.to_string()}")
    return df

"""
로깅 설정

각 모듈은 logging.getLogger(__name__)만 사용하고,
핸들러 구성은 진입점에서 setup_logging() 한 번으로 끝냅니다.
"""

import logging
from pathlib import Path
from typing import Optional, Union

from config.settings import LOGGING


def setup_logging(log_dir: Optional[Union[str, Path]] = None, level: Optional[str] = None) -> logging.Logger:
    """콘솔 + (선택) 파일 로깅 설정"""
    handlers = [logging.StreamHandler()]

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_dir / LOGGING['FILE_NAME'], encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, (level or LOGGING['LEVEL']).upper(), logging.INFO),
        format=LOGGING['FORMAT'],
        handlers=handlers,
        force=True,
    )
    return logging.getLogger('atnforge')

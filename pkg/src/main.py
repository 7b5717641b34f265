"""
atnforge - 메인 실행 파일

이 파일은 프로젝트의 메인 진입점입니다.

사용법:
    python -m src.main train-classifier --config configs/classifiers.ini --threads 5
    python -m src.main train-atn --config configs/atn_sweep.ini --threads 4
    python -m src.main eval --config configs/atn_sweep.ini
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.append(str(project_root))

from config.settings import EXIT_CODES, OUTPUT_LAYOUT
from src.cli.commands import COMMANDS
from src.cli.config_file import load_config
from src.errors import (
    CheckpointCorruptionError, CheckpointVersionError, ConfigError, ContractError, DatasetConsistencyError,
    DatasetFormatError, NumericalError, TruncatedFileError,
)
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

# 설정/입력 문제로 보는 예외 (종료 코드 2)
INPUT_ERRORS = (
    ConfigError, FileNotFoundError, DatasetFormatError, DatasetConsistencyError, TruncatedFileError,
    CheckpointCorruptionError, CheckpointVersionError, ContractError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='atnforge',
        description='Adversarial Transformation Network 학습 / 평가 도구 (MNIST)',
    )
    parser.add_argument('command', choices=sorted(COMMANDS), help='실행할 서브커맨드')
    parser.add_argument('--config', type=str, default=None, help='실험 설정 파일 (INI)')
    parser.add_argument('--seed', type=int, default=None, help='설정 파일의 seed 대신 사용')
    parser.add_argument('--out', type=str, default=None, help='출력 디렉토리')
    parser.add_argument('--threads', type=int, default=None, help='독립 작업 병렬 수')
    parser.add_argument('--log-level', type=str, default=None, help='DEBUG | INFO | WARNING')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """메인 실행 함수, 종료 코드 반환"""
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config).with_overrides(args.seed, args.out, args.threads)
    except INPUT_ERRORS as e:
        setup_logging(level=args.log_level)
        logger.error(f"❌ 설정 오류: {e}")
        return EXIT_CODES['CONFIG_ERROR']

    setup_logging(config.output_dir / OUTPUT_LAYOUT['LOGS'], args.log_level)
    logger.info(f"🚀 atnforge {args.command} 시작 (seed={config.seed}, out={config.output_dir})")

    try:
        COMMANDS[args.command](config)
    except NumericalError as e:
        logger.error(f"❌ 수치 오류: {e}")
        return EXIT_CODES['NUMERICAL_ERROR']
    except INPUT_ERRORS as e:
        logger.error(f"❌ 입력 오류: {e}")
        return EXIT_CODES['CONFIG_ERROR']

    logger.info(f"✅ {args.command} 완료")
    return EXIT_CODES['OK']


if __name__ == "__main__":
    sys.exit(main())

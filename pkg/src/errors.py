"""
atnforge 예외 계층

라이브러리 코드는 오류를 출력하고 넘어가지 않고 아래 예외를 발생시킵니다.
CLI(src/cli/commands.py)가 이를 종료 코드로 변환합니다.
"""


class AtnForgeError(Exception):
    """모든 atnforge 예외의 기반 클래스"""


class DimensionError(AtnForgeError, ValueError):
    """텐서 shape 불일치"""


class ContractError(AtnForgeError, ValueError):
    """사전조건/계약 위반 (frozen 네트워크 학습, 빈 데이터셋 등)"""


class BuildError(AtnForgeError, ValueError):
    """NetworkSpec 레이어 shape 연결 실패"""


class NumericalError(AtnForgeError, FloatingPointError):
    """학습 중 NaN/Inf 발생"""


class DatasetFormatError(AtnForgeError, ValueError):
    """IDX magic number 불일치"""


class DatasetConsistencyError(AtnForgeError, ValueError):
    """이미지 수와 라벨 수 불일치"""


class TruncatedFileError(AtnForgeError, OSError):
    """파일이 헤더가 선언한 길이보다 짧음"""


class CheckpointCorruptionError(AtnForgeError, ValueError):
    """체크포인트 checksum 불일치"""


class CheckpointVersionError(AtnForgeError, ValueError):
    """지원하지 않는 체크포인트 포맷 버전"""


class ConfigError(AtnForgeError, ValueError):
    """실험 설정 파일 파싱/검증 실패"""

"""
src/cli/config_file.py

실험 설정 파일(INI) 로드

예시:
    [experiment]
    seed = 0
    output = runs/atn_sweep

    [data]
    root = data/mnist

    [classifiers]
    names = classifier_p, classifier_a1
    epochs = 10

    [atn]
    architectures = a
    mode = autoencode
    targets = 0-9
    betas = 0.010, 0.005, 0.001

    [eval]
    classifier = classifier_p

    [network:classifier_small]
    kind = classifier
    seed = 11
    layers =
        conv 3x3 16 stride=2 same relu
        flatten
        fc 10 none

파일에 없는 값은 config/settings.py 기본값을 사용합니다.
"""

import configparser
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from config.settings import (
    ATN_TRAINING, CLASSIFIER_TRAINING, DATA_DIR, EVALUATION, NUM_CLASSES, OUTPUT_DIR,
)
from src.adversary.atn import GenerationMode
from src.adversary.rerank import RerankMode
from src.errors import BuildError, ConfigError
from src.experiments.reports import REPORT_FORMATS
from src.networks.network import infer_shapes
from src.networks.specs import ATN_ARCHITECTURES, CLASSIFIER_SPECS, NetworkSpec, spec_from_lines

logger = logging.getLogger(__name__)

SECTIONS = ('experiment', 'data', 'classifiers', 'atn', 'eval')
NETWORK_PREFIX = 'network:'


@dataclass
class ExperimentConfig:
    """한 번의 실행에 필요한 모든 설정"""
    seed: int = 0
    output_dir: Path = OUTPUT_DIR
    threads: int = 1

    # [data]
    data_root: Path = DATA_DIR
    train_limit: Optional[int] = None
    test_limit: Optional[int] = None

    # [classifiers]
    classifiers: List[str] = field(default_factory=lambda: list(CLASSIFIER_TRAINING['NAMES']))
    classifier_epochs: int = CLASSIFIER_TRAINING['EPOCHS']
    classifier_batch: int = CLASSIFIER_TRAINING['BATCH']
    classifier_lr: float = CLASSIFIER_TRAINING['LR']

    # [atn]
    architectures: List[str] = field(default_factory=lambda: list(ATN_TRAINING['ARCHITECTURES']))
    mode: GenerationMode = GenerationMode(ATN_TRAINING['MODE'])
    targets: List[int] = field(default_factory=lambda: list(ATN_TRAINING['TARGETS']))
    target_classifiers: List[str] = field(default_factory=lambda: list(ATN_TRAINING['TARGET_CLASSIFIERS']))
    alpha: float = ATN_TRAINING['ALPHA']
    betas: List[float] = field(default_factory=lambda: list(ATN_TRAINING['BETAS']))
    atn_epochs: int = ATN_TRAINING['EPOCHS']
    atn_batch: int = ATN_TRAINING['BATCH']
    atn_lr: float = ATN_TRAINING['LR']
    insider: bool = ATN_TRAINING['INSIDER']
    rerank: RerankMode = RerankMode(ATN_TRAINING['RERANK'])
    log_every: int = ATN_TRAINING['LOG_EVERY']

    # [eval]
    eval_classifier: str = EVALUATION['CLASSIFIER']
    transfer_classifiers: List[str] = field(default_factory=lambda: list(EVALUATION['TRANSFER_CLASSIFIERS']))
    chain_architecture: str = EVALUATION['CHAIN_ARCHITECTURE']
    chain_beta: float = EVALUATION['CHAIN_BETA']
    chain_images: int = EVALUATION['CHAIN_IMAGES']
    fgsm_epsilon: float = EVALUATION['FGSM_EPSILON']
    eval_batch: int = EVALUATION['BATCH']
    report_formats: List[str] = field(default_factory=lambda: list(EVALUATION['REPORT_FORMATS']))

    # [network:<name>] 로 선언한 사용자 정의 네트워크
    networks: Dict[str, NetworkSpec] = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if any(not b > 0 for b in self.betas) or not self.betas:
            raise ConfigError(f"betas 는 양수 목록이어야 합니다: {self.betas}")
        if not self.targets or any(not 0 <= t < NUM_CLASSES for t in self.targets):
            raise ConfigError(f"targets 는 0~{NUM_CLASSES - 1} 범위여야 합니다: {self.targets}")
        if not self.alpha > 1:
            raise ConfigError(f"alpha 는 1 보다 커야 합니다: {self.alpha}")
        if not self.chain_beta > 0:
            raise ConfigError(f"chain_beta 는 양수여야 합니다: {self.chain_beta}")
        if self.fgsm_epsilon < 0:
            raise ConfigError(f"fgsm_epsilon 은 0 이상이어야 합니다: {self.fgsm_epsilon}")
        for name, value in (('threads', self.threads), ('classifier_batch', self.classifier_batch),
                            ('atn_batch', self.atn_batch), ('eval_batch', self.eval_batch)):
            if value < 1:
                raise ConfigError(f"{name} 는 1 이상이어야 합니다: {value}")
        for fmt in self.report_formats:
            if fmt not in REPORT_FORMATS:
                raise ConfigError(f"지원하지 않는 리포트 형식: {fmt}")
        for arch in [*self.architectures, self.chain_architecture]:
            if arch not in ATN_ARCHITECTURES and self.networks.get(arch, None) is None:
                raise ConfigError(f"알 수 없는 ATN 아키텍처: {arch} (a|b|c 또는 [network:<name>])")
        for name in {*self.classifiers, *self.target_classifiers, *self.transfer_classifiers,
                     self.eval_classifier}:
            self.classifier_spec(name)

    def classifier_spec(self, name: str) -> NetworkSpec:
        spec = self.networks.get(name) or CLASSIFIER_SPECS.get(name)
        if spec is None:
            raise ConfigError(f"알 수 없는 분류기: {name}")
        if spec.kind != 'classifier':
            raise ConfigError(f"{name} 은 분류기가 아닙니다 (kind={spec.kind})")
        return spec

    def atn_custom_spec(self, name: str) -> Optional[NetworkSpec]:
        spec = self.networks.get(name)
        if spec is not None and spec.kind != 'atn':
            raise ConfigError(f"{name} 은 ATN 본체가 아닙니다 (kind={spec.kind})")
        return spec

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[Union[str, Path]] = None,
                       threads: Optional[int] = None) -> 'ExperimentConfig':
        """CLI 플래그가 파일 값보다 우선"""
        updates = {}
        if seed is not None:
            updates['seed'] = seed
        if output_dir is not None:
            updates['output_dir'] = Path(output_dir)
        if threads is not None:
            updates['threads'] = threads
        return replace(self, **updates)


# ----- 값 파서 -----
def _split(value: str) -> List[str]:
    return [v.strip() for v in value.replace('\n', ',').split(',') if v.strip()]


def parse_int_list(value: str) -> List[int]:
    """'0-9' / '1, 3, 7' / '0-2, 5' 모두 허용"""
    out: List[int] = []
    for token in _split(value):
        try:
            if '-' in token.lstrip('-'):
                lo, hi = token.split('-', 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(token))
        except ValueError as e:
            raise ConfigError(f"정수 목록 형식 오류: '{token}'") from e
    return out


def parse_float_list(value: str) -> List[float]:
    try:
        return [float(v) for v in _split(value)]
    except ValueError as e:
        raise ConfigError(f"실수 목록 형식 오류: '{value}'") from e


def _optional_int(section: configparser.SectionProxy, key: str) -> Optional[int]:
    raw = section.get(key, '').strip()
    return int(raw) if raw else None


def _network_spec(name: str, section: configparser.SectionProxy) -> NetworkSpec:
    kind = section.get('kind', 'classifier').strip()
    if kind not in ('classifier', 'atn'):
        raise ConfigError(f"[network:{name}] kind 는 classifier|atn: {kind}")
    lines = [line for line in section.get('layers', '').splitlines() if line.strip()]
    if not lines:
        raise ConfigError(f"[network:{name}] layers 가 비어 있습니다")
    try:
        spec = spec_from_lines(name, kind, lines, seed=section.getint('seed', 0),
                               insider_width=section.getint('insider_width', 0))
        infer_shapes(spec)
    except BuildError as e:
        raise ConfigError(f"[network:{name}] {e}") from e
    return spec


def load_config(path: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """INI 파일 -> ExperimentConfig (path 가 없으면 기본값)"""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"설정 파일이 없습니다: {path}")

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding='utf-8')
    except configparser.Error as e:
        raise ConfigError(f"{path}: 설정 파일 파싱 실패 ({e})") from e

    unknown = [s for s in parser.sections() if s not in SECTIONS and not s.startswith(NETWORK_PREFIX)]
    if unknown:
        raise ConfigError(f"{path}: 알 수 없는 섹션 {unknown}")

    for s in SECTIONS:
        if not parser.has_section(s):
            parser.add_section(s)
    exp, data, clf, atn, ev = (parser[s] for s in SECTIONS)
    defaults = ExperimentConfig()

    try:
        networks = {
            s[len(NETWORK_PREFIX):]: _network_spec(s[len(NETWORK_PREFIX):], parser[s])
            for s in parser.sections() if s.startswith(NETWORK_PREFIX)
        }
        config = ExperimentConfig(
            seed=exp.getint('seed', defaults.seed),
            output_dir=Path(exp.get('output', str(defaults.output_dir))),
            threads=exp.getint('threads', defaults.threads),
            data_root=Path(data.get('root', str(defaults.data_root))),
            train_limit=_optional_int(data, 'train_limit'),
            test_limit=_optional_int(data, 'test_limit'),
            classifiers=_split(clf['names']) if 'names' in clf else defaults.classifiers,
            classifier_epochs=clf.getint('epochs', defaults.classifier_epochs),
            classifier_batch=clf.getint('batch', defaults.classifier_batch),
            classifier_lr=clf.getfloat('lr', defaults.classifier_lr),
            architectures=_split(atn['architectures']) if 'architectures' in atn else defaults.architectures,
            mode=GenerationMode(atn.get('mode', defaults.mode.value).strip()),
            targets=parse_int_list(atn['targets']) if 'targets' in atn else defaults.targets,
            target_classifiers=(_split(atn['target_classifiers']) if 'target_classifiers' in atn
                                else defaults.target_classifiers),
            alpha=atn.getfloat('alpha', defaults.alpha),
            betas=parse_float_list(atn['betas']) if 'betas' in atn else defaults.betas,
            atn_epochs=atn.getint('epochs', defaults.atn_epochs),
            atn_batch=atn.getint('batch', defaults.atn_batch),
            atn_lr=atn.getfloat('lr', defaults.atn_lr),
            insider=atn.getboolean('insider', defaults.insider),
            rerank=RerankMode(atn.get('rerank', defaults.rerank.value).strip()),
            log_every=atn.getint('log_every', defaults.log_every),
            eval_classifier=ev.get('classifier', defaults.eval_classifier).strip(),
            transfer_classifiers=(_split(ev['transfer_classifiers']) if 'transfer_classifiers' in ev
                                  else defaults.transfer_classifiers),
            chain_architecture=ev.get('chain_architecture', defaults.chain_architecture).strip(),
            chain_beta=ev.getfloat('chain_beta', defaults.chain_beta),
            chain_images=ev.getint('chain_images', defaults.chain_images),
            fgsm_epsilon=ev.getfloat('fgsm_epsilon', defaults.fgsm_epsilon),
            eval_batch=ev.getint('batch', defaults.eval_batch),
            report_formats=_split(ev['formats']) if 'formats' in ev else defaults.report_formats,
            networks=networks,
        )
    except ValueError as e:
        # ConfigError 도 ValueError 이므로 메시지에 파일 경로만 덧붙임
        if isinstance(e, ConfigError):
            raise ConfigError(f"{path}: {e}") from e
        raise ConfigError(f"{path}: 설정 값 형식 오류 ({e})") from e

    logger.info(f"⚙️ 설정 로드: {path} (seed={config.seed}, out={config.output_dir})")
    return config

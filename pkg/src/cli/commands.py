"""
src/cli/commands.py

서브커맨드 구현 (train-classifier, train-atn, eval, transfer, chain, fgsm)

🎯 핵심 목표:
- 설정 하나로 분류기 학습부터 전이/chain 평가까지 재현
- 독립 작업(목표 클래스별 ATN 등)은 ThreadPoolExecutor 로 분산, 결과는 작업 순서대로 모음
- 작업별 seed 는 SeedSequence 로 파생 (스레드 스케줄과 무관하게 결정적)
"""

import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd

from config.settings import NUM_CLASSES, OUTPUT_LAYOUT
from src.adversary.atn import Atn, GenerationMode, build_atn, load_atn, save_atn
from src.adversary.training import steps_for_epochs, train_atn
from src.autodiff.optim import Adam
from src.cli.config_file import ExperimentConfig
from src.data_io.checkpoint import deserialize, serialize
from src.data_io.mnist import LabeledDataset, load_mnist_split, shuffled_indices
from src.errors import ConfigError
from src.experiments.chain import parallel_chain, serial_chain
from src.experiments.fgsm import fgsm_report
from src.experiments.metrics import EvalReport, aggregate_reports, eval_atn
from src.experiments.reports import chain_frame, emit_report, save_chain_grid, save_success_grid
from src.experiments.transfer import TransferMatrix, success_count_histogram, transfer_eval
from src.networks.network import Network, build_network
from src.networks.specs import ATN_ARCHITECTURES
from src.networks.training import evaluate_accuracy, train_classifier
from src.visualization.charts import chain_histogram_figure, loss_curve_figure, save_figure, transfer_heatmap

logger = logging.getLogger(__name__)

T = TypeVar('T')


# ----- 출력 디렉토리 / 파일 이름 -----
@dataclass(frozen=True)
class OutputPaths:
    root: Path
    checkpoints: Path
    reports: Path
    grids: Path
    logs: Path

    @classmethod
    def create(cls, root: Path) -> 'OutputPaths':
        root = Path(root)
        dirs = {key.lower(): root / name for key, name in OUTPUT_LAYOUT.items()}
        for d in dirs.values():
            d.mkdir(parents=True, exist_ok=True)
        return cls(root=root, **dirs)

    def classifier_checkpoint(self, name: str) -> Path:
        return self.checkpoints / f"{name}.ckpt"

    def atn_checkpoint(self, label: str, t: int, beta: float) -> Path:
        return self.checkpoints / f"{label}_t{t}_beta{beta:g}.ckpt"


def atn_label(config: ExperimentConfig, architecture: str) -> str:
    """체크포인트/리포트에 쓰는 ATN 이름: 본체 이름 + 모드/타깃 수 표시"""
    base = architecture if architecture not in ATN_ARCHITECTURES else f"atn_{architecture}"
    if config.insider:
        base += '_insider'
    if config.mode == GenerationMode.PERTURBATION:
        base += '_pert'
    if len(config.target_classifiers) > 1:
        base += f"_multi{len(config.target_classifiers)}"
    return base


def derive_seed(base: int, *keys) -> int:
    """(base seed, 작업 키) -> 32-bit seed"""
    spawn_key = tuple(zlib.crc32(str(k).encode('utf-8')) for k in keys)
    return int(np.random.SeedSequence(base, spawn_key=spawn_key).generate_state(1)[0])


def run_jobs(jobs: Sequence[Callable[[], T]], threads: int) -> List[T]:
    """작업 목록 실행, 결과는 입력 순서 그대로"""
    if threads <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


# ----- 데이터 / 체크포인트 로드 -----
def load_data(config: ExperimentConfig, split: str) -> LabeledDataset:
    if not config.data_root.exists():
        raise ConfigError(f"데이터 디렉토리가 없습니다: {config.data_root}")
    data = load_mnist_split(split, config.data_root)
    limit = config.train_limit if split == 'train' else config.test_limit
    return data.take(limit) if limit else data


def load_classifier(paths: OutputPaths, name: str) -> Network:
    """학습된 분류기 체크포인트 -> frozen Network"""
    path = paths.classifier_checkpoint(name)
    if not path.exists():
        raise ConfigError(f"분류기 체크포인트가 없습니다: {path} (먼저 train-classifier 실행)")
    return deserialize(path).freeze()


def load_trained_atn(paths: OutputPaths, label: str, t: int, beta: float) -> Atn:
    path = paths.atn_checkpoint(label, t, beta)
    if not path.exists():
        raise ConfigError(f"ATN 체크포인트가 없습니다: {path} (먼저 train-atn 실행)")
    return load_atn(path)


class ClassifierCache:
    """이름 -> frozen 분류기 (여러 번 읽지 않도록)"""

    def __init__(self, paths: OutputPaths):
        self.paths = paths
        self._nets: Dict[str, Network] = {}

    def get(self, name: str) -> Network:
        if name not in self._nets:
            self._nets[name] = load_classifier(self.paths, name)
        return self._nets[name]

    def insider_source(self, atn: Atn) -> Optional[Network]:
        """insider ATN 은 학습 때 첫 번째 타깃의 활성값을 사용"""
        if not atn.config.insider:
            return None
        if not atn.trained_against:
            raise ConfigError(f"{atn.name}: 체크포인트에 학습 대상 분류기 정보가 없습니다")
        return self.get(atn.trained_against[0])


# ----- train-classifier -----
def cmd_train_classifier(config: ExperimentConfig) -> List[Path]:
    """분류기 학습 -> checkpoints/<name>.ckpt + logs/<name>_train.csv"""
    paths = OutputPaths.create(config.output_dir)
    train, test = load_data(config, 'train'), load_data(config, 'test')

    def job(name: str) -> Path:
        spec = config.classifier_spec(name)
        net = build_network(spec.with_seed(derive_seed(config.seed, 'classifier', name, spec.seed)))
        log = train_classifier(net, train, config.classifier_epochs, config.classifier_batch,
                               seed=derive_seed(config.seed, 'shuffle', name),
                               optimizer=Adam(lr=config.classifier_lr), test_data=test)
        accuracy = evaluate_accuracy(net, test, config.eval_batch)
        log.to_csv(paths.logs / f"{name}_train.csv", index=False, float_format='%.6f', lineterminator='\n')
        logger.info(f"✅ {name} 테스트 정확도 {accuracy:.2%}")
        return serialize(net, paths.classifier_checkpoint(name),
                         metadata={'test_accuracy': accuracy, 'epochs': config.classifier_epochs})

    return run_jobs([lambda n=name: job(n) for name in config.classifiers], config.threads)


# ----- train-atn -----
def _atn_jobs(config: ExperimentConfig) -> List[Tuple[str, float, int]]:
    return [(arch, beta, t) for arch in config.architectures for beta in config.betas for t in config.targets]


def cmd_train_atn(config: ExperimentConfig) -> List[Path]:
    """(아키텍처, β, 목표 t) 조합마다 ATN 하나 학습"""
    paths = OutputPaths.create(config.output_dir)
    targets = [load_classifier(paths, name) for name in config.target_classifiers]
    images = load_data(config, 'train').images
    steps = steps_for_epochs(len(images), config.atn_epochs, config.atn_batch)

    def job(arch: str, beta: float, t: int) -> Path:
        label = atn_label(config, arch)
        atn = build_atn(t, beta, targets, architecture=arch, mode=config.mode, insider=config.insider,
                        alpha=config.alpha, seed=derive_seed(config.seed, label, t, beta),
                        rerank=config.rerank, body_spec=config.atn_custom_spec(arch))
        log = train_atn(atn, images, steps, config.atn_batch,
                        seed=derive_seed(config.seed, 'shuffle', label, t, beta),
                        optimizer=Adam(lr=config.atn_lr), log_every=config.log_every)
        atn.release_targets()

        stem = f"{label}_t{t}_beta{beta:g}"
        log.to_csv(paths.logs / f"{stem}_loss.csv", index=False, float_format='%.6f', lineterminator='\n')
        save_figure(loss_curve_figure(log, title=stem), paths.logs / f"{stem}_loss.html")
        return save_atn(atn, paths.atn_checkpoint(label, t, beta))

    jobs = [lambda a=a, b=b, t=t: job(a, b, t) for a, b, t in _atn_jobs(config)]
    logger.info(f"🚀 ATN {len(jobs)}개 학습 (threads={config.threads}, steps={steps})")
    return run_jobs(jobs, config.threads)


# ----- eval -----
def _emit(reports, paths: OutputPaths, stem: str, formats: Sequence[str]) -> List[Path]:
    return [emit_report(reports, paths.reports / f"{stem}.{fmt}", fmt) for fmt in formats]


def cmd_eval(config: ExperimentConfig) -> List[EvalReport]:
    """eval 분류기에 대해 모든 (아키텍처, β, t) ATN 평가 + ATN_{0-9} 평균표 + 성공 예제 격자"""
    paths = OutputPaths.create(config.output_dir)
    cache = ClassifierCache(paths)
    classifier = cache.get(config.eval_classifier)
    test = load_data(config, 'test')

    reports: List[EvalReport] = []
    for arch in config.architectures:
        label = atn_label(config, arch)
        for beta in config.betas:
            cell: List[EvalReport] = []
            for t in config.targets:
                atn = load_trained_atn(paths, label, t, beta)
                cell.append(eval_atn(atn, classifier, test, config.eval_batch,
                                     insider_source=cache.insider_source(atn), label=label))
            save_success_grid(cell, paths.grids / f"{label}_beta{beta:g}_{classifier.name}.pgm")
            reports.extend(cell)

    _emit(reports, paths, 'eval', config.report_formats)
    _emit(aggregate_reports(reports), paths, 'eval_summary', config.report_formats)
    return reports


# ----- transfer -----
def cmd_transfer(config: ExperimentConfig) -> List[TransferMatrix]:
    """학습에 쓰지 않은 분류기까지 포함한 전이 행렬과 '속인 분류기 수' 히스토그램"""
    paths = OutputPaths.create(config.output_dir)
    cache = ClassifierCache(paths)
    classifiers = [cache.get(name) for name in config.transfer_classifiers]
    test = load_data(config, 'test')
    trained = [n for n in config.transfer_classifiers if n in config.target_classifiers]
    unseen = [n for n in config.transfer_classifiers if n not in config.target_classifiers]

    matrices = []
    for arch in config.architectures:
        label = atn_label(config, arch)
        for beta in config.betas:
            matrix = TransferMatrix(list(config.transfer_classifiers))
            histograms: Dict[str, np.ndarray] = {}
            for t in config.targets:
                atn = load_trained_atn(paths, label, t, beta)
                row = transfer_eval(atn, classifiers, test, config.eval_batch,
                                    insider_source=cache.insider_source(atn), label=label)
                matrix.add_row(row)
                for group, names in (('trained', trained), ('unseen', unseen)):
                    if names:
                        counts = success_count_histogram(row, names)
                        histograms[group] = histograms.get(group, 0) + counts

            stem = f"transfer_{label}_beta{beta:g}"
            _emit(matrix.reports(), paths, stem, config.report_formats)
            table = matrix.to_frame()
            table.loc['mean'] = table.mean(axis=0)
            table.to_csv(paths.reports / f"{stem}_matrix.csv", float_format='%.4f', lineterminator='\n')
            save_figure(transfer_heatmap(table, title=f"{label} beta={beta:g}"), paths.reports / f"{stem}.html")
            if histograms:
                hist = pd.DataFrame({g: pd.Series(c) for g, c in histograms.items()}).fillna(0).astype(int)
                hist.index.name = 'classifiers_fooled'
                hist.to_csv(paths.reports / f"{stem}_histogram.csv", lineterminator='\n')
            matrices.append(matrix)
    return matrices


# ----- chain -----
def cmd_chain(config: ExperimentConfig) -> Dict[str, object]:
    """ATN_0..9 병렬 / 직렬 적용 결과"""
    paths = OutputPaths.create(config.output_dir)
    cache = ClassifierCache(paths)
    classifier = cache.get(config.eval_classifier)
    test = load_data(config, 'test')
    label = atn_label(config, config.chain_architecture)
    atns = [load_trained_atn(paths, label, t, config.chain_beta) for t in range(NUM_CLASSES)]

    sample = shuffled_indices(len(test), derive_seed(config.seed, 'chain'))[:config.chain_images]
    images = test.images[np.sort(sample)]
    results = {
        'parallel': parallel_chain(atns, classifier, images, config.eval_batch),
        'serial': serial_chain(atns, classifier, images, config.eval_batch),
    }

    hist = chain_frame(results)
    hist.to_csv(paths.reports / 'chain.csv', lineterminator='\n')
    steps = pd.DataFrame({mode: r.per_step_rate() for mode, r in results.items()},
                         index=pd.RangeIndex(NUM_CLASSES, name='atn_target'))
    steps.to_csv(paths.reports / 'chain_steps.csv', float_format='%.4f', lineterminator='\n')
    save_figure(chain_histogram_figure(hist, title=f"{label} beta={config.chain_beta:g}"),
                paths.reports / 'chain.html')
    for mode, report in results.items():
        save_chain_grid(report, images, paths.grids / f"chain_{mode}.pgm")
        logger.info(f"⛓️ {mode}: all-10 {report.all10_count}/{report.n_images}")
    return results


# ----- fgsm -----
def cmd_fgsm(config: ExperimentConfig) -> List[EvalReport]:
    """fast gradient sign 기준선 (목표 클래스별)"""
    paths = OutputPaths.create(config.output_dir)
    classifier = load_classifier(paths, config.eval_classifier)
    test = load_data(config, 'test')
    reports = [fgsm_report(classifier, test, t, config.fgsm_epsilon, config.eval_batch) for t in config.targets]
    _emit(reports, paths, f"fgsm_eps{config.fgsm_epsilon:g}", config.report_formats)
    return reports


COMMANDS: Dict[str, Callable[[ExperimentConfig], object]] = {
    'train-classifier': cmd_train_classifier,
    'train-atn': cmd_train_atn,
    'eval': cmd_eval,
    'transfer': cmd_transfer,
    'chain': cmd_chain,
    'fgsm': cmd_fgsm,
}

# ================== RECOMMENDER CONFIGURATION ==================
"""
Eğitim ve deney ayarları - Tüm parametreler tek bir yerden yönetiliyor
"""

import configparser
import os
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, List, Optional, Tuple

# ================== MODEL ==================
EMBED_DIM = 32                 # embedding genişliği d
NUM_LAYERS = 2                 # mixhop katman sayısı L
HOPS = (0, 1, 2)               # hop kümesi M
MAX_HOP = 4                    # Ã^4 üstü desteklenmez
LEAKY_SLOPE = 0.5              # LeakyReLU eğimi (sabit)
READOUT = "mean"               # "mean" (h0 + tüm katmanlar) veya "last"

# ================== AUGMENTASYON ==================
MASK_KEEP_PROB = 0.8           # düğüm maskesi tutma olasılığı ρ
GUMBEL_TAU = 1.0               # soft-Bernoulli sıcaklığı τ₁
EDGE_THRESHOLD = 0.2           # örnekleme eşiği ξ
CANDIDATE_POLICY = "observed"  # "observed" veya "two_hop"
CANDIDATE_BUDGET = 0.1         # two_hop için ek aday oranı (E'ye göre)
UNIFORM_EPS = 1e-12            # ε′ uç değer kırpması

# ================== GIB ==================
GIB_BETA = 1.0                 # KL terimi Lagrange ağırlığı β
POSTERIOR_FLOOR = 1e-6         # η alt sınırı
LIKELIHOOD_VIEWS = "both"      # "both" veya "first"
KL_REDUCTION = "sum"           # KL kullanıcılar üzerinde "sum" veya "mean"

# ================== OPTİMİZASYON ==================
TEMPERATURE = 0.9              # InfoNCE sıcaklığı τ
BETA1 = 1e-5                   # GIB ağırlığı
BETA2 = 1.0                    # CL ağırlığı
BETA3 = 1e-7                   # Frobenius düzenlileştirme
LEARNING_RATE = 0.001          # ι
LR_DECAY = 0.96                # epoch başına lr çarpanı
EPOCHS = 50
BATCH_SIZE = 2048
OPTIMIZER = "sgd"              # "sgd" veya "adam"
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
CL_NEGATIVES = "batch"         # "batch" veya "all"
LOSS_REDUCTION = "mean"        # BPR ve InfoNCE: "mean" (örnek başına) veya "sum"
SEED = 2023

# ================== PARAMETRE IZGARALARI ==================
DIM_GRID = (8, 16, 32, 64)
LAYER_GRID = (1, 2, 3)
TAU_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
XI_GRID = (0.0, 0.2, 0.4, 0.6, 0.8)
BETA1_GRID = (1e-6, 1e-5, 1e-4, 1e-3)

SWEEP_GRIDS = {
    "tau": TAU_GRID,
    "beta1": BETA1_GRID,
    "dim": DIM_GRID,
    "xi": XI_GRID,
    "layers": LAYER_GRID,
}

# ================== DEĞERLENDİRME ==================
TOP_KS = (20, 40)
TEST_FRACTION = 0.2
GROUP_BOUNDARIES = (0, 10, 20, 30, 40, 50)
NOISE_RATIOS = (0.05, 0.1, 0.15, 0.2, 0.25)
NOISE_MAX_ATTEMPTS = 50        # eklenecek kenar başına reddetme denemesi
EVAL_CHUNK = 256               # skorlama blok boyutu (kullanıcı)

# ================== LOG AYARLARI ==================
PRINT_PREFIX = "🧪"
VERBOSE_TRAIN = True
LOG_EVERY = 1                  # kaç epoch'ta bir log

# ================== ÇIKTI ==================
OUTPUT_DIR_ENV = "GIBREC_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "runs"
PROTOCOLS = ("ablation", "noise", "groups", "hyperparam-sweep")

# ================== VARYANT AYARLARI ==================
VARIANT_CONFIGS = {
    "full": {},
    "w/o-mixhop": {"hops": (1,)},
    "w/o-gib": {"beta1": 0.0},
    "w/o-cl": {"beta2": 0.0},
}


# ================== TRAIN CONFIG ==================
@dataclass
class TrainConfig:
    """Algoritmanın tüm hiperparametreleri"""
    dim: int = EMBED_DIM
    layers: int = NUM_LAYERS
    hops: Tuple[int, ...] = HOPS
    slope: float = LEAKY_SLOPE
    readout: str = READOUT
    tau: float = TEMPERATURE
    tau1: float = GUMBEL_TAU
    xi: float = EDGE_THRESHOLD
    mask_keep: float = MASK_KEEP_PROB
    candidate_policy: str = CANDIDATE_POLICY
    candidate_budget: float = CANDIDATE_BUDGET
    beta1: float = BETA1
    beta2: float = BETA2
    beta3: float = BETA3
    gib_beta: float = GIB_BETA
    likelihood_views: str = LIKELIHOOD_VIEWS
    kl_reduction: str = KL_REDUCTION
    negatives: str = CL_NEGATIVES
    loss_reduction: str = LOSS_REDUCTION
    lr: float = LEARNING_RATE
    lr_decay: float = LR_DECAY
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    optimizer: str = OPTIMIZER
    seed: int = SEED
    variant: str = "full"

    def __post_init__(self):
        self.hops = tuple(sorted(set(int(m) for m in self.hops)))

    def validate(self) -> "TrainConfig":
        """Geçersiz değerde ConfigurationError fırlat"""
        from utils.errors import ConfigurationError

        checks = [
            (self.dim >= 1, "dim >= 1 olmalı"),
            (self.layers >= 1, "layers >= 1 olmalı"),
            (len(self.hops) >= 1, "hop kümesi boş olamaz"),
            (all(0 <= m <= MAX_HOP for m in self.hops), f"hop değerleri [0, {MAX_HOP}] aralığında olmalı"),
            (len(self.hops) <= self.dim, "|M| embedding genişliğini aşamaz"),
            (0.0 <= self.slope <= 1.0, "slope [0,1] aralığında olmalı"),
            (self.readout in ("mean", "last"), "readout 'mean' veya 'last' olmalı"),
            (self.tau > 0, "tau > 0 olmalı"),
            (self.tau1 > 0, "tau1 > 0 olmalı"),
            (0.0 <= self.xi < 1.0, "xi [0,1) aralığında olmalı"),
            (0.0 <= self.mask_keep <= 1.0, "mask_keep [0,1] aralığında olmalı"),
            (self.candidate_policy in ("observed", "two_hop"), "bilinmeyen aday politikası"),
            (0.0 <= self.candidate_budget <= 1.0, "candidate_budget [0,1] aralığında olmalı"),
            (min(self.beta1, self.beta2, self.beta3, self.gib_beta) >= 0, "kayıp ağırlıkları negatif olamaz"),
            (self.beta1 == 0 or self.dim % 2 == 0, "GIB havuzlaması çift dim gerektirir"),
            (self.likelihood_views in ("both", "first"), "likelihood_views 'both' veya 'first' olmalı"),
            (self.negatives in ("batch", "all"), "negatives 'batch' veya 'all' olmalı"),
            (self.loss_reduction in ("sum", "mean"), "loss_reduction 'sum' veya 'mean' olmalı"),
            (self.kl_reduction in ("sum", "mean"), "kl_reduction 'sum' veya 'mean' olmalı"),
            (self.lr > 0, "lr > 0 olmalı"),
            (0 < self.lr_decay <= 1.0, "lr_decay (0,1] aralığında olmalı"),
            (self.epochs >= 1, "epochs >= 1 olmalı"),
            (self.batch_size >= 1, "batch_size >= 1 olmalı"),
            (self.optimizer in ("sgd", "adam"), "optimizer 'sgd' veya 'adam' olmalı"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigurationError(message)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hops"] = list(self.hops)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            from utils.errors import ConfigurationError
            raise ConfigurationError(f"bilinmeyen ayar(lar): {sorted(unknown)}")
        return cls(**data)

    def replace(self, **overrides) -> "TrainConfig":
        data = self.to_dict()
        data.update(overrides)
        return TrainConfig.from_dict(data)


def get_train_config(variant: str = "full", **overrides) -> TrainConfig:
    """Varyant için eğitim ayarlarını getir"""
    from utils.errors import ConfigurationError

    if variant not in VARIANT_CONFIGS:
        raise ConfigurationError(f"geçersiz varyant: {variant}")
    data = TrainConfig().to_dict()
    data.update(overrides)
    data.update(VARIANT_CONFIGS[variant])
    data["variant"] = variant
    return TrainConfig.from_dict(data).validate()


# ================== RUN CONFIG ==================
@dataclass
class RunConfig:
    """Komut satırı çalıştırma ayarları"""
    dataset: str
    output_dir: str = DEFAULT_OUTPUT_DIR
    train: TrainConfig = field(default_factory=TrainConfig)
    protocol: Optional[str] = None
    seeds: Tuple[int, ...] = (SEED,)
    test_fraction: float = TEST_FRACTION
    variants: Tuple[str, ...] = tuple(VARIANT_CONFIGS)
    noise_ratios: Tuple[float, ...] = NOISE_RATIOS
    noise_variants: Tuple[str, ...] = ("full", "w/o-gib")
    sweep_param: str = "tau"
    sweep_values: Tuple[float, ...] = TAU_GRID
    group_axis: str = "user"
    group_boundaries: Tuple[int, ...] = GROUP_BOUNDARIES
    workers: int = 1

    def validate(self, check_paths: bool = True) -> "RunConfig":
        from utils.errors import ConfigurationError, InputError

        if not self.seeds:
            raise ConfigurationError("seed listesi boş olamaz")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigurationError("test_fraction (0,1) aralığında olmalı")
        if self.protocol is not None and self.protocol not in PROTOCOLS:
            raise ConfigurationError(f"bilinmeyen protokol: {self.protocol}")
        for variant in tuple(self.variants) + tuple(self.noise_variants):
            if variant not in VARIANT_CONFIGS:
                raise ConfigurationError(f"geçersiz varyant: {variant}")
        if self.sweep_param not in SWEEP_GRIDS:
            raise ConfigurationError(f"taranamayan parametre: {self.sweep_param}")
        if self.group_axis not in ("user", "item"):
            raise ConfigurationError("group_axis 'user' veya 'item' olmalı")
        if self.workers < 1:
            raise ConfigurationError("workers >= 1 olmalı")
        self.train.validate()
        if check_paths and not os.path.exists(self.dataset):
            raise InputError(f"veri seti bulunamadı: {self.dataset}")
        return self

    def resolved_output_dir(self) -> str:
        """Ortam değişkeni varsa onu kullan"""
        return os.getenv(OUTPUT_DIR_ENV) or self.output_dir


_TRAIN_CASTS = {
    "dim": int, "layers": int, "epochs": int, "batch_size": int, "seed": int,
    "hops": lambda text: tuple(int(x) for x in text.split(",") if x.strip()),
    "readout": str, "candidate_policy": str, "likelihood_views": str,
    "negatives": str, "optimizer": str, "variant": str,
    "loss_reduction": str, "kl_reduction": str,
}


def load_run_config(path: str) -> RunConfig:
    """INI benzeri 'anahtar = değer' dosyasından RunConfig oku

    Bölümler: [data], [train], [run], [experiment]
    """
    from utils.errors import ConfigurationError, InputError
    from utils.helpers import parse_list

    if not os.path.exists(path):
        raise InputError(f"konfigürasyon dosyası bulunamadı: {path}")

    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigurationError(f"konfigürasyon okunamadı: {e}") from e

    if not parser.has_option("data", "path"):
        raise ConfigurationError("[data] bölümünde 'path' gerekli")

    base_dir = os.path.dirname(os.path.abspath(path))
    dataset = parser.get("data", "path")
    if not os.path.isabs(dataset):
        dataset = os.path.join(base_dir, dataset)

    train_data = TrainConfig().to_dict()
    if parser.has_section("train"):
        for key, raw in parser.items("train"):
            if key not in train_data:
                raise ConfigurationError(f"bilinmeyen [train] anahtarı: {key}")
            cast = _TRAIN_CASTS.get(key, float)
            try:
                train_data[key] = cast(raw)
            except ValueError as e:
                raise ConfigurationError(f"[train] {key} = {raw!r}: {e}") from e

    def get(section: str, key: str, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    try:
        run = RunConfig(
            dataset=dataset,
            output_dir=get("run", "output_dir", DEFAULT_OUTPUT_DIR),
            train=TrainConfig.from_dict(train_data),
            protocol=get("run", "protocol"),
            seeds=tuple(parse_list(get("run", "seeds", str(SEED)), int)),
            test_fraction=float(get("data", "test_fraction", TEST_FRACTION)),
            variants=tuple(parse_list(get("experiment", "variants", ",".join(VARIANT_CONFIGS)), str)),
            noise_ratios=tuple(parse_list(get("experiment", "noise_ratios", ",".join(map(str, NOISE_RATIOS))))),
            noise_variants=tuple(parse_list(get("experiment", "noise_variants", "full,w/o-gib"), str)),
            sweep_param=get("experiment", "sweep_param", "tau"),
            group_axis=get("experiment", "group_axis", "user"),
            group_boundaries=tuple(parse_list(get("experiment", "group_boundaries",
                                                   ",".join(map(str, GROUP_BOUNDARIES))), int)),
            workers=int(get("run", "workers", 1)),
        )
    except ValueError as e:
        raise ConfigurationError(f"konfigürasyon değeri okunamadı: {e}") from e

    sweep_raw = get("experiment", "sweep_values")
    if sweep_raw is not None:
        run.sweep_values = tuple(parse_list(sweep_raw))
    elif run.sweep_param in SWEEP_GRIDS:
        run.sweep_values = tuple(SWEEP_GRIDS[run.sweep_param])

    return run

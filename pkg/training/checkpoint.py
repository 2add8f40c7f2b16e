# ================== CHECKPOINTS ==================
"""
Deterministik checkpoint dosyaları

Dosya, sabit zaman damgalı .npy üyelerinden oluşan bir zip'tir (np.load ile de
açılabilir). Aynı parametreler her zaman bayt düzeyinde aynı dosyayı üretir.
"""

import io
import json
import zipfile
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from config.settings import TrainConfig
from training.trainer import ModelParams
from utils.errors import InputError

FORMAT_VERSION = 1
_FIXED_TIME = (1980, 1, 1, 0, 0, 0)


@dataclass
class Checkpoint:
    model: ModelParams
    meta: Dict[str, Any]

    @property
    def config(self) -> TrainConfig:
        return self.model.config


def _npy_bytes(array: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    np.lib.format.write_array(buffer, np.ascontiguousarray(array), allow_pickle=False)
    return buffer.getvalue()


def _write_member(archive: zipfile.ZipFile, name: str, array: np.ndarray) -> None:
    info = zipfile.ZipInfo(f"{name}.npy", date_time=_FIXED_TIME)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    archive.writestr(info, _npy_bytes(array))


def save_checkpoint(path: str, model: ModelParams, meta: Dict[str, Any] = None) -> str:
    """Parametreler + optimizer durumu + ayarlar + veri/bölme bilgisi"""
    header = {
        "format": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "n_users": model.n_users,
        "n_items": model.n_items,
        "optimizer": model.optimizer.state_dict(),
        "meta": meta or {},
    }
    encoded = json.dumps(header, sort_keys=True).encode("utf-8")

    with zipfile.ZipFile(path, "w") as archive:
        _write_member(archive, "header", np.frombuffer(encoded, dtype=np.uint8))
        for name, value in sorted(model.state_dict().items()):
            _write_member(archive, f"param/{name}", value)
        for name, value in sorted(model.optimizer.state_arrays().items()):
            _write_member(archive, f"optim/{name}", value)
    return path


def load_checkpoint(path: str) -> Checkpoint:
    """Kaydedilmiş modeli yeniden kur"""
    try:
        with zipfile.ZipFile(path, "r") as archive:
            arrays = {
                name[:-len(".npy")]: np.lib.format.read_array(io.BytesIO(archive.read(name)), allow_pickle=False)
                for name in archive.namelist()
            }
    except (OSError, zipfile.BadZipFile, ValueError) as e:
        raise InputError(f"checkpoint okunamadı: {path}: {e}") from e

    if "header" not in arrays:
        raise InputError(f"checkpoint başlığı eksik: {path}")
    header = json.loads(arrays["header"].tobytes().decode("utf-8"))
    if header.get("format") != FORMAT_VERSION:
        raise InputError(f"desteklenmeyen checkpoint sürümü: {header.get('format')}")

    config = TrainConfig.from_dict(header["config"])
    model = ModelParams(config, int(header["n_users"]), int(header["n_items"]))
    model.load_state_dict({k[len("param/"):]: v for k, v in arrays.items() if k.startswith("param/")})
    model.optimizer.load_state_dict(header["optimizer"])
    model.optimizer.load_state_arrays({k[len("optim/"):]: v for k, v in arrays.items() if k.startswith("optim/")})
    return Checkpoint(model, header["meta"])

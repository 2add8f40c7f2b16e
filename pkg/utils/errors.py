# ================== ERROR TYPES ==================
"""
Hata sınıfları - CLI çıkış kodları bu hiyerarşiye göre belirlenir
"""

from typing import Optional


class RecommenderError(Exception):
    """Tüm proje hatalarının tabanı"""


class ContractViolation(RecommenderError):
    """Ön koşul / sözleşme ihlali (yanlış şekil, geçersiz argüman)"""


class NumericError(RecommenderError):
    """Sonlu olmayan değer veya sıfır normlu satır"""


class ConfigurationError(RecommenderError):
    """Geçersiz hiperparametre veya konfigürasyon dosyası"""


class InputError(RecommenderError):
    """Veri seti okunamadı"""


class ParseError(InputError):
    """Bozuk satır - satır numarası ile"""

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f"satır {line_number}: {reason} ({line.strip()!r})")


class EmptyDatasetError(InputError):
    """Etkileşim içermeyen veri akışı"""


class NoiseInjectionError(RecommenderError):
    """Graf neredeyse tam - sahte kenar bulunamadı"""


class TrainingAborted(RecommenderError):
    """Eğitim sırasında sonlu olmayan kayıp"""

    def __init__(self, epoch: int, step: int, reason: str, cause: Optional[BaseException] = None):
        self.epoch = epoch
        self.step = step
        self.cause = cause
        super().__init__(f"eğitim durdu (epoch={epoch}, step={step}): {reason}")

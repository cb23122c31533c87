import hashlib
import json
import platform

import psutil


def default_threads() -> int:
    """Число физических ядер (логических, если psutil не знает физических)"""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def get_host_stats() -> dict:
    """Состояние машины на момент запуска, пишется в лог перед экспериментом"""
    memory = psutil.virtual_memory()
    return {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "cpu_physical": psutil.cpu_count(logical=False),
        "cpu_logical": psutil.cpu_count(),
        "memory_total_mb": round(memory.total / (2 ** 20), 2),
        "memory_used_percent": memory.percent,
    }


def config_hash(payload: dict) -> str:
    """sha256 канонического JSON конфигурации"""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

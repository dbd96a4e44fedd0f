"""
Cache Manager for crowd traces
Stores engine traces on disk keyed by everything that determines them
"""

import hashlib
import json
import pickle
import logging
from pathlib import Path
from typing import Dict, Optional

from config import Config
from modules.engine import Trace
from modules.population import ScenarioSpec
from modules.space import FloorPlan, serialize_floor_plan

logger = logging.getLogger(__name__)


class TraceCache:
    """Pickle cache for crowd traces shared by every sweep point of a scenario"""

    def __init__(self, cache_dir: str = Config.TRACE_CACHE_DIR, max_cache_size_mb: int = Config.TRACE_CACHE_MAX_MB):
        self.cache_dir = Path(cache_dir)
        self.max_cache_size = max_cache_size_mb * 1024 * 1024
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._cleanup_oversize()

    def _generate_cache_key(self, data: Dict) -> str:
        data_str = json.dumps(data, sort_keys=True, default=repr)
        return hashlib.md5(data_str.encode()).hexdigest()

    def _get_cache_path(self, cache_key: str) -> Path:
        return self.cache_dir / f"{cache_key}.trace"

    def trace_key(self, plan: FloorPlan, scenario: ScenarioSpec, dt: float, horizon: float,
                  rho_max: float = Config.RHO_MAX, speed_floor: float = Config.SPEED_FLOOR) -> str:
        return self._generate_cache_key({
            'plan': serialize_floor_plan(plan),
            'scenario': repr(scenario),
            'dt': dt,
            'horizon': horizon,
            'rho_max': rho_max,
            'speed_floor': speed_floor,
        })

    def get_trace(self, key: str) -> Optional[Trace]:
        cache_path = self._get_cache_path(key)
        if not cache_path.exists():
            return None
        try:
            with open(cache_path, 'rb') as f:
                trace = pickle.load(f)
            logger.info(f"Cache hit for trace {key[:12]}")
            return trace
        except Exception as e:
            logger.error(f"Failed to load trace cache: {str(e)}")
            cache_path.unlink(missing_ok=True)
            return None

    def set_trace(self, key: str, trace: Trace):
        cache_path = self._get_cache_path(key)
        try:
            with open(cache_path, 'wb') as f:
                pickle.dump(trace, f, protocol=pickle.HIGHEST_PROTOCOL)
            logger.info(f"Cached trace {key[:12]} ({len(trace.crossings)} crossings)")
        except Exception as e:
            logger.error(f"Failed to cache trace: {str(e)}")

    def _cleanup_oversize(self):
        """Drop oldest traces until the cache fits in 80% of its budget"""
        try:
            files = sorted(self.cache_dir.glob("*.trace"), key=lambda p: p.stat().st_mtime)
            total_size = sum(p.stat().st_size for p in files)
            while files and total_size > self.max_cache_size * 0.8:
                oldest = files.pop(0)
                total_size -= oldest.stat().st_size
                oldest.unlink()
                logger.info(f"Removed old trace for size limit: {oldest.name}")
        except Exception as e:
            logger.error(f"Failed to cleanup cache: {str(e)}")

    def clear_cache(self):
        for cache_file in self.cache_dir.glob("*.trace"):
            cache_file.unlink()
        logger.info("Cleared trace cache")

    def get_cache_stats(self) -> Dict:
        files = list(self.cache_dir.glob("*.trace"))
        return {
            'total_files': len(files),
            'total_size_mb': round(sum(p.stat().st_size for p in files) / (1024 * 1024), 2),
        }

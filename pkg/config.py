"""
Configuration settings for the crowd/IoT design-space explorer
Environment-driven defaults for the simulator, device models and sweep harness
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ('true', '1', 'yes', 'on')


class Config:
    # 🚶 CROWD SIMULATION 🚶
    SIM_DT = float(os.getenv('SIM_DT', 0.5))  # seconds per step
    SIM_HORIZON_S = float(os.getenv('SIM_HORIZON_S', 7200))  # 2 hours
    ROOT_SEED = int(os.getenv('ROOT_SEED', 20240601))
    RHO_MAX = float(os.getenv('RHO_MAX', 5.0))  # persons/m2 at which flow stalls
    SPEED_FLOOR = float(os.getenv('SPEED_FLOOR', 0.05))
    MIN_DESIRED_SPEED = 0.3
    MAX_DESIRED_SPEED = 2.5

    # 📡 IOT DEVICES 📡
    CAPTURE_WINDOW_S = float(os.getenv('CAPTURE_WINDOW_S', 900))  # 15 minutes
    MODE_THRESHOLD = float(os.getenv('MODE_THRESHOLD', 40))
    MODE_HYSTERESIS = float(os.getenv('MODE_HYSTERESIS', 10))
    QR_MIN_DWELL_S = float(os.getenv('QR_MIN_DWELL_S', 2.0))
    COVERAGE_CAMERA_M = float(os.getenv('COVERAGE_CAMERA_M', 3.0))
    COVERAGE_RFID_M = float(os.getenv('COVERAGE_RFID_M', 2.0))
    COVERAGE_COUNTER_M = float(os.getenv('COVERAGE_COUNTER_M', 0.3))
    COVERAGE_QR_M = float(os.getenv('COVERAGE_QR_M', 1.0))

    # ⚙️ SWEEP HARNESS ⚙️
    SWEEP_JOBS = int(os.getenv('SWEEP_JOBS', 0))  # 0 = all cores
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'out')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    COMMON_RANDOM_NUMBERS = _env_bool('COMMON_RANDOM_NUMBERS', 'true')
    TRACE_CACHE_ENABLED = _env_bool('TRACE_CACHE_ENABLED', 'false')
    TRACE_CACHE_DIR = os.getenv('TRACE_CACHE_DIR', 'cache')
    TRACE_CACHE_MAX_MB = int(os.getenv('TRACE_CACHE_MAX_MB', 500))

    # Export Settings
    PDF_TITLE = "IoT Architecture Trade-off Report"
    RESULTS_BASENAME = "sweep_results"

    @classmethod
    def get_coverage_defaults(cls):
        """Default coverage length (meters) per device type"""
        return {
            'camera': cls.COVERAGE_CAMERA_M,
            'rfid': cls.COVERAGE_RFID_M,
            'counter': cls.COVERAGE_COUNTER_M,
            'qr': cls.COVERAGE_QR_M,
        }

    @classmethod
    def resolve_jobs(cls, jobs=None):
        """Worker count for sweeps; 0 or None means available hardware parallelism"""
        jobs = cls.SWEEP_JOBS if jobs is None else jobs
        if jobs and jobs > 0:
            return jobs
        return os.cpu_count() or 1

    @classmethod
    def validate_settings(cls):
        """Check every numeric setting against its allowed range"""
        status = {
            'valid': [],
            'issues': [],
        }

        checks = [
            ('SIM_DT', 0 < cls.SIM_DT <= 2),
            ('SIM_HORIZON_S', cls.SIM_HORIZON_S > 0),
            ('RHO_MAX', cls.RHO_MAX > 0),
            ('SPEED_FLOOR', 0 < cls.SPEED_FLOOR <= 1),
            ('CAPTURE_WINDOW_S', cls.CAPTURE_WINDOW_S > 0),
            ('MODE_THRESHOLD', cls.MODE_THRESHOLD > 0),
            ('MODE_HYSTERESIS', 0 <= cls.MODE_HYSTERESIS < cls.MODE_THRESHOLD),
            ('QR_MIN_DWELL_S', cls.QR_MIN_DWELL_S >= 0),
            ('SWEEP_JOBS', cls.SWEEP_JOBS >= 0),
        ]
        for name, value in cls.get_coverage_defaults().items():
            checks.append((f'COVERAGE_{name.upper()}_M', value > 0))

        for name, ok in checks:
            if ok:
                status['valid'].append(name)
            else:
                status['issues'].append(f"{name}={getattr(cls, name, '?')} is out of range")

        status['ready'] = not status['issues']
        return status

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def crc8_bitwise(data: bytes) -> int:
    """Reference CRC-8 (poly 0x07, init 0), shifted one bit at a time."""
    reg = 0
    for byte in data:
        for i in range(7, -1, -1):
            top = (reg >> 7) & 1
            reg = (reg << 1) & 0xFF
            if top ^ ((byte >> i) & 1):
                reg ^= 0x07
    return reg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_payload(rng, lo=1, hi=32) -> bytes:
    return bytes(rng.integers(0, 256, int(rng.integers(lo, hi + 1))).tolist())

import numpy as np
import pytest

from mnscodec.image import GrayImage

from util import gradient_image, natural_image, noise_image, scene_image


@pytest.fixture(scope="session")
def natural_256():
    return natural_image(256, 256, seed=7)


@pytest.fixture(scope="session")
def natural_128():
    return natural_image(128, 128, seed=3)


@pytest.fixture(scope="session")
def scene_crop_64():
    big = scene_image(256, 256, seed=7)
    return GrayImage(big.pixels[96:160, 64:128])


@pytest.fixture(scope="session")
def noise_64():
    return noise_image(64, 64, seed=11)


@pytest.fixture(scope="session")
def gradient_64():
    return gradient_image(64, 64)


@pytest.fixture(scope="session")
def constant_64():
    return GrayImage(np.full((64, 64), 42, dtype=np.uint8))

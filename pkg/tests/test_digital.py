import numpy as np
import pytest

from gaitbench import FrameSequence, SeededRng, severity_params
from gaitbench.digital import (
    DiskKernel,
    center_zoom,
    defocus_blur,
    gaussian_noise,
    impulse_noise,
    motion_blur,
    motion_kernel,
    shot_noise,
    speckle_noise,
    zoom_blur,
    zoom_blur_factors,
    zoom_in,
    zoom_in_factors,
)
from gaitbench.errors import FrameTooSmall
from helpers import const_seq


def _diff(out, inp):
    return (out.data.astype(float) - inp.data.astype(float)) / 255.0


def test_gaussian_std_severity1():
    seq = const_seq(128)
    std = _diff(gaussian_noise(seq, 1, 11), seq).std()
    assert 0.072 <= std <= 0.088


def test_gaussian_shape_preserved(seq30):
    out = gaussian_noise(seq30, 3, 0)
    assert out.data.shape == seq30.data.shape and out.data.dtype == np.uint8


def test_speckle_black_fixed_point():
    seq = const_seq(0)
    assert speckle_noise(seq, 5, 1) == seq


def test_speckle_std_half_gray():
    seq = FrameSequence(np.full((1, 128, 128, 3), 128, np.uint8))
    std = _diff(speckle_noise(seq, 1, 2), seq).std()
    x = 128 / 255
    assert abs(std - x * 0.15) <= 0.1 * x * 0.15


def test_shot_black_fixed_point():
    seq = const_seq(0)
    assert shot_noise(seq, 5, 1) == seq


def test_shot_mean_half_gray():
    seq = const_seq(128)
    m = shot_noise(seq, 1, 3).data.mean() / 255
    assert 0.48 <= m <= 0.52


def test_impulse_changed_fraction_sev1():
    seq = const_seq(128)
    out = impulse_noise(seq, 1, 4)
    changed = np.any(out.data != seq.data, axis=-1).mean()
    assert 0.024 <= changed <= 0.036


def test_impulse_untouched_pixels_identical(seq30):
    out = impulse_noise(seq30, 5, 8)
    changed = np.any(out.data != seq30.data, axis=-1)
    assert changed.any()
    hit = out.data[changed]
    # every changed pixel is pure black or pure white on all channels
    assert np.all((hit == 0).all(-1) | (hit == 255).all(-1))


def test_impulse_amount_override():
    seq = const_seq(128)
    assert impulse_noise(seq, 1, 0, amount=0.0) == seq
    out = impulse_noise(seq, 1, 0, amount=0.01)
    assert np.any(out.data != seq.data, axis=-1).mean() < 0.02
    with pytest.raises(ValueError):
        impulse_noise(seq, 1, 0, amount=1.5)


@pytest.mark.parametrize("fn", [defocus_blur, zoom_blur, motion_blur])
def test_blur_constant_fixed_point(fn):
    seq = const_seq(77, n=2)
    assert fn(seq, 5, 0) == seq


def test_disk_kernel_normalized():
    for r, a in [(3, 0.1), (10, 0.5)]:
        k = DiskKernel.build(r, a).taps
        assert abs(k.sum() - 1.0) < 1e-12
        assert k.shape == (2 * r + 3, 2 * r + 3)
        assert np.allclose(k, k.T) and np.allclose(k, k[::-1])


def test_defocus_impulse_response():
    # float-level check: the kernel spreads a point over the radius-3 disk and conserves mass
    from scipy import ndimage

    img = np.zeros((41, 41))
    img[20, 20] = 1.0
    out = ndimage.correlate(img, DiskKernel.build(3, 0.1).taps, mode="reflect")
    assert abs(out.sum() - 1.0) < 0.01
    yy, xx = np.mgrid[0:41, 0:41]
    r = np.hypot(yy - 20, xx - 20)
    assert out[r <= 3].sum() > 0.95
    assert out[r > 5].sum() < 1e-6


def test_defocus_frame_too_small():
    with pytest.raises(FrameTooSmall):
        defocus_blur(const_seq(10, h=20, w=64), 5, 0)


def test_zoom_blur_factors():
    assert np.allclose(zoom_blur_factors(2), np.round(np.arange(1.0, 1.1601, 0.01), 2))
    assert len(zoom_blur_factors(1)) == 12


def test_zoom_blur_radial():
    x = np.zeros((1, 65, 65, 3), np.uint8)
    x[0, 22:43, 22:43] = 255
    seq = FrameSequence(x)
    out = zoom_blur(seq, 5, 0)
    err = ((out.data[0].astype(float) - x[0]) ** 2).mean(-1)
    # the square's outer border picks up the smear, its center does not
    border = np.concatenate([err[21, 22:43], err[43, 22:43], err[22:43, 21], err[22:43, 43]])
    assert err[32, 32] < border.mean()


def test_motion_kernel_theta0_row_segment():
    seq = np.zeros((1, 61, 61, 3), np.uint8)
    seq[0, 30, 30] = 255
    out = motion_blur(FrameSequence(seq), 1, 0, angle=0.0)
    ys, xs = np.nonzero(out.data[0, :, :, 0])
    assert set(ys) == {30}
    assert xs.max() - xs.min() + 1 <= 2 * 10 + 1


def test_motion_kernel_normalized_and_directional():
    k = motion_kernel(15, 5, 90.0)
    assert abs(k.sum() - 1) < 1e-12
    assert np.count_nonzero(k[:, 15] > 0) == 16 and k[:, :15].sum() == 0


def test_motion_angle_seeded():
    from gaitbench.digital import motion_angle

    assert motion_angle(3) == motion_angle(SeededRng(3))
    assert 0 <= motion_angle(3) < 180


def test_zoom_in_first_frame_identical(seq30):
    out = zoom_in(seq30, 3, 0)
    assert np.array_equal(out[0], seq30[0])
    assert zoom_in_factors(3, 30)[-1] == 2.5


def test_zoom_in_square_side():
    x = np.zeros((5, 64, 64, 3), np.uint8)
    x[:, 27:37, 27:37] = 255
    out = zoom_in(FrameSequence(x), 3, 0)
    side = (out[-1][:, :, 0] > 127).sum(axis=1).max()
    assert abs(side - 25) <= 2


def test_center_zoom_identity():
    x = np.random.default_rng(0).random((9, 7, 3))
    assert np.array_equal(center_zoom(x, 1.0), x)


@pytest.mark.parametrize("fn", [gaussian_noise, speckle_noise, shot_noise, impulse_noise])
def test_noise_worker_independence(fn, seq30):
    assert fn(seq30, 3, 5).digest() == fn(seq30, 3, 5, workers=4).digest()
    assert fn(seq30, 3, 5).digest() != fn(seq30, 3, 6).digest()


@pytest.mark.parametrize("severity", [1, 2, 3, 4, 5])
def test_gaussian_std_matches_clipped_quantized_law(severity):
    # exact law of the output level: normal mass between rounding boundaries,
    # with everything past 0 or 255 piled onto the end levels
    from scipy.stats import norm

    (sigma,) = severity_params("gaussian_noise", severity)
    levels = np.arange(256)
    upper = norm.cdf(((levels + 0.5) / 255 - 128 / 255) / sigma)
    upper[-1] = 1.0
    prob = np.diff(np.concatenate([[0.0], upper]))
    dev = (levels - 128) / 255
    mean = prob @ dev
    want = np.sqrt(prob @ (dev - mean) ** 2)
    seq = const_seq(128, h=128, w=128)
    got = ((gaussian_noise(seq, severity, 42).data.astype(float) - 128) / 255).std()
    assert got == pytest.approx(want, rel=0.02)

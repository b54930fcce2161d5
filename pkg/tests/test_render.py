import numpy as np
import pytest
from PIL import Image

from cubictess.dynamics import CubicMap, Escape, Undecided, free_orbit_limit
from cubictess.errors import ChartUnavailable, DomainError
from cubictess.parameter import s2_map, trace_parameter_ray
from cubictess.render import (
    BLUE,
    BROWN,
    NEUTRAL,
    ImageJob,
    Julia,
    Parameter,
    julia_image,
    marked_points,
    parameter_image,
    ray_overlay,
    save_image,
    similarity_pair,
    write_ppm,
)


PALETTE = {tuple(c.astype(np.uint8)) for c in (BROWN, BLUE, NEUTRAL)}


def looks_escaping(px) -> bool:
    # exterior shades are multiples of a warm white, so blue/red stays near 225/255
    r, _, b = (int(c) for c in px)
    return tuple(px) not in PALETTE and b / max(r, 1) > 0.8


def test_cube_is_a_brown_disk():
    img = julia_image(ImageJob(Julia(CubicMap(0, 0)), width=3.0, resolution=(61, 61)))
    assert img.shape == (61, 61, 3) and img.dtype == np.uint8
    assert tuple(img[30, 30]) == tuple(BROWN.astype(np.uint8))
    assert looks_escaping(img[0, 0])
    job = ImageJob(Julia(CubicMap(0, 0)), width=3.0, resolution=(61, 61))
    Z = job.grid()
    inside = np.abs(Z) < 0.95
    outside = np.abs(Z) > 1.05
    brown = np.all(img == BROWN.astype(np.uint8), axis=-1)
    assert brown[inside].all() and not brown[outside].any()


def test_one_pixel_images():
    for target in (Julia(CubicMap(0, 0)), Parameter(1), Parameter(2)):
        job = ImageJob(target, resolution=(1, 1))
        img = julia_image(job) if isinstance(target, Julia) else parameter_image(job)
        assert img.shape == (1, 1, 3)


def test_rendering_is_deterministic():
    job = ImageJob(Parameter(2), width=3.0, resolution=(48, 40))
    assert np.array_equal(parameter_image(job), parameter_image(job))


def test_job_validation():
    with pytest.raises(DomainError):
        ImageJob(Parameter(1), width=0.0)
    with pytest.raises(DomainError):
        ImageJob(Parameter(1), resolution=(0, 10))
    with pytest.raises(DomainError):
        julia_image(ImageJob(Parameter(1)))


def test_pixel_audit_against_orbit_classes():
    # a window around the connectedness locus, so both classes are well represented
    job = ImageJob(Parameter(2), width=0.6, resolution=(80, 80))
    img = parameter_image(job)
    T = job.grid()
    rng = np.random.default_rng(11)
    checked, escaping = 0, 0
    for _ in range(100):
        i, j = rng.integers(0, 80, size=2)
        t = T[i, j]
        if abs(t) < 1e-9:
            continue
        lim = free_orbit_limit(s2_map(t))
        if isinstance(lim, Undecided):
            continue
        assert looks_escaping(img[i, j]) == isinstance(lim, Escape)
        checked += 1
        escaping += isinstance(lim, Escape)
    assert checked >= 90 and 20 < escaping < checked - 20


def test_lemon_component_of_s1_is_brown():
    job = ImageJob(Parameter(1), width=2.0, resolution=(21, 21))
    img = parameter_image(job)
    assert tuple(img[10, 10]) == tuple(BROWN.astype(np.uint8))


def test_crash_overlay_draws_the_rays():
    F = s2_map(trace_parameter_ray("inner", "7/12", G_min=0.05).endpoint)
    plain = ImageJob(Julia(F), width=4.0, resolution=(96, 96))
    overlays = (ray_overlay(F, "1/4"), ray_overlay(F, "11/12"), *marked_points(F))
    drawn = ImageJob(Julia(F), width=4.0, resolution=(96, 96), overlays=overlays)
    a, b = julia_image(plain), julia_image(drawn)
    assert (np.abs(a.astype(int) - b.astype(int)).sum(axis=-1) > 30).sum() > 50


def test_image_files(tmp_path):
    img = julia_image(ImageJob(Julia(CubicMap(0, 0)), resolution=(8, 6)))
    save_image(img, tmp_path / "x.png")
    write_ppm(img, tmp_path / "x.ppm")
    assert np.array_equal(np.asarray(Image.open(tmp_path / "x.png")), img)
    assert np.array_equal(np.asarray(Image.open(tmp_path / "x.ppm")), img)


def test_similarity_windows():
    F0 = CubicMap(1 / np.sqrt(2), 0)
    pair = similarity_pair(F0, 2, zoom=1.0, width=1.0, render=False)
    assert pair.dynamic.center == 2 * F0.a and pair.dynamic.width == 1.0
    assert pair.tail == (0, 1)
    # the parameter window is the dynamic one pulled back by ds/dt
    assert pair.parameter.width * abs(pair.derivative) == pytest.approx(1.0)
    zoomed = similarity_pair(F0, 2, zoom=4.0, width=1.0, render=False)
    assert zoomed.dynamic.width == 0.25
    with pytest.raises(ChartUnavailable):
        similarity_pair(F0, 3)

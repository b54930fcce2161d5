"""Frozen reference values shared by the unit and acceptance tests."""

TABLE_D = [1, 2, 8, 24, 80, 232, 728, 2160, 6552]
TABLE_N = [1, 2, 8, 20, 56, 144, 404, 1112, 3120]
TABLE_ANGLES = [(2, 4), (6, 12), (24, 48), (72, 144), (240, 480), (696, 1392), (2184, 4368),
                (6480, 12960)]
# (q, p): (v_ideal, v_par, e, f, chi, kernel, image)
TABLE_TESS = {
    (1, 1): (1, 2, 4, 3, 2, 0, 0),
    (2, 1): (1, 6, 12, 7, 2, 0, 0),
    (3, 1): (1, 24, 48, 25, 2, 0, 0),
    (1, 2): (2, 6, 8, 3, 2, 1, 0),
    (2, 2): (2, 8, 24, 16, 2, 0, 0),
    (3, 2): (2, 48, 96, 49, 2, 1, 0),
    (1, 3): (8, 24, 32, 9, 0, 7, 2),
    (2, 3): (8, 48, 96, 42, 0, 2, 0),
    (3, 3): (8, 168, 384, 208, 0, 0, 0),
}
# numerators over 24 of the co-period-2 angles
COPERIODIC_2 = [1, 2, 5, 7, 10, 11, 13, 14, 17, 19, 22, 23]

"""Published case-study tables, transcribed verbatim."""

ST_EXTERNAL_TABLE = [
    # id, a1..a5, D
    (0, 0, 0, 0, 0, 0, 0),
    (1, 0, 0, 0, 0, 1, 1),
    (2, 0, 0, 0, 0, 1, 1),
    (3, 1, 0, 0, 0, 2, 2),
    (4, 0, 1, 0, 0, 3, 3),
    (5, 1, 1, 0, 1, 4, 4),
    (6, 1, 2, 0, 1, 3, 3),
    (7, 1, 2, 0, 0, 4, 4),
]

# upper triangle of the printed external discernibility matrix, row by row
ST_EXTERNAL_MATRIX = [
    ["a5", "a5", "a1a5", "a2a5", "a1a2a4a5", "a1a2a4a5", "a1a2a5"],
    ["0", "a1a5", "a2a5", "a2a4a5", "a1a2a4a5", "a1a2a5"],
    ["a1a5", "a2a5", "a2a4a5", "a1a2a4a5", "a1a2a5"],
    ["a1a2a5", "a2a4a5", "a2a4a5", "a2a5"],
    ["a1a4a5", "0", "a1a2a5"],
    ["a2a5", "0"],
    ["a4a5"],
]

ST_INTERNAL_TABLE = [
    (1, 0, 0, 0, 0, 0, 0),
    (2, 1, 0, 0, 0, 0, 0),
    (3, 0, 0, 0, 0, 0, 0),
    (4, 0, 0, 0, 0, 0, 0),
    (5, 1, 1, 0, 0, 1, 0),
    (6, 1, 0, 0, 0, 1, 0),
    (7, 0, 0, 0, 0, 0, 0),
    (8, 0, 0, 1, 0, 1, 1),
    (9, 1, 0, 0, 0, 0, 0),
    (10, 1, 0, 0, 0, 0, 0),
    (11, 1, 1, 0, 0, 1, 1),
    (12, 0, 0, 0, 0, 0, 0),
    (13, 0, 0, 0, 0, 0, 0),
    (14, 1, 1, 0, 0, 1, 1),
]


def printed_external_cell(i: int, j: int) -> str:
    return ST_EXTERNAL_MATRIX[i][j - i - 1]

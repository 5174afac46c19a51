"""Hand-built and frozen polygon fixtures with known structure.

Each fixture was constructed (or searched for deterministically) so the
pipeline produces a specific combinatorial outcome; the expected structure
is asserted in tests, so regressions in the pipeline show up as fixture
test failures.
"""

from polyguard.geometry import Polygon

# 19-gon: two deep pockets off a corridor. Deploys 3 diagonal guards and
# 2 vertex guards (|S_c| = 5); the activation staircase has exactly two
# steps: one immediately above r = 0 (a triangle adjoining its guard's owned
# region) and one geometric threshold near r = 0.74, after which the polygon
# is fully covered.
TWO_STEP_19GON = Polygon.from_points(
    [
        [0.0, 0.0], [2.25, 0.0], [4.5, 0.0], [6.75, 0.0], [9.0, 0.0],
        [11.25, 0.0], [13.5, 0.0], [15.75, 0.0], [18.0, 0.0], [18.0, 6.0],
        [14.9, 6.0], [14.3, 1.0], [13.1, 0.9], [12.5, 6.0], [5.1, 6.0],
        [4.7, 1.0], [3.9, 0.9], [3.5, 6.0], [0.0, 6.0],
    ]
)

# 48-gon comb: sawtooth floor and five pockets of alternating depth.
# Deploys 7 diagonal + 5 vertex guards; the staircase climbs through at
# least four distinct thresholds before saturating with all five static
# guards active.
MULTI_STEP_48GON = Polygon.from_points(
    [
        [0.0, 0.0], [1.92, 2.0], [3.84, 0.0], [5.76, 2.0], [7.68, 0.0],
        [9.6, 2.0], [11.52, 0.0], [13.44, 2.0], [15.36, 0.0], [17.28, 2.0],
        [19.2, 0.0], [21.12, 2.0], [23.04, 0.0], [24.96, 2.0], [26.88, 0.0],
        [28.8, 2.0], [30.72, 0.0], [32.64, 2.0], [34.56, 0.0], [36.48, 2.0],
        [38.4, 0.0], [40.32, 2.0], [42.24, 0.0], [44.16, 2.0], [46.08, 0.0],
        [48.0, 0.0], [48.0, 8.0], [43.0, 8.0], [42.25, 4.6], [40.75, 4.5],
        [40.0, 8.0], [34.0, 8.0], [33.25, 2.8], [31.75, 2.7], [31.0, 8.0],
        [25.0, 8.0], [24.25, 4.6], [22.75, 4.5], [22.0, 8.0], [16.0, 8.0],
        [15.25, 2.8], [13.75, 2.7], [13.0, 8.0], [7.0, 8.0], [6.25, 4.6],
        [4.75, 4.5], [4.0, 8.0], [0.0, 8.0],
    ]
)

# 21-gon whose activation recursion must hop through two diagonal guards
# before finding an inactive vertex guard (G_rec path of three triangles).
CHAIN_21GON = Polygon.from_points(
    [
        [19.300042219675376, 12.53195104551664],
        [13.122015390297348, 19.85462385128907],
        [3.7462537597349588, 18.17846216906165],
        [1.5235422708101587, 14.447564358219287],
        [0.4817129994090408, 13.707309673344376],
        [6.597890181120205, 12.125591887078869],
        [3.374546965890035, 8.221921678549801],
        [17.080313691896386, 3.6558622337689717],
        [12.828122955158367, 2.935078196852663],
        [11.661505651866143, 3.15165704869925],
        [0.8929590449371272, 5.893783364305625],
        [6.1526782029115274, 1.6627216471632922],
        [18.18003732355902, 2.8656639880982304],
        [15.497306961441, 7.3583987924315375],
        [14.661410142875495, 8.213450337591855],
        [16.481321348039362, 11.093099221911753],
        [13.60883107222647, 10.365958242434413],
        [13.673427626272352, 13.058393306572837],
        [9.85868096695977, 17.87338026597146],
        [16.273229432924193, 15.441667784231148],
        [19.75208386338845, 11.275232026305018],
    ]
)

# 18-gon whose partition yields pieces with 5, 6, 6 and 7 vertices (three
# separating diagonals) and whose deployment has |S_c| = 4, |S_h| = 3 with
# a single vertex guard.
PARTITION_18GON = Polygon.from_points(
    [
        [2.0139307664875683, 13.640323082353948],
        [3.9351927207827964, 13.596938876274775],
        [7.752323497185156, 2.962463282456056],
        [4.883587242319085, 13.630508589906471],
        [3.708155900521908, 15.415058780672446],
        [6.167140302101641, 14.554356922206965],
        [10.447686135297992, 10.78373022063398],
        [14.90124211671229, 1.5796265046289304],
        [16.221301490063425, 2.112348589722939],
        [17.29668024193726, 5.337831241699595],
        [19.787468544345273, 15.802230410268635],
        [17.973920188579637, 16.41668387676235],
        [2.3769383899108254, 18.945667063397174],
        [11.00942768881539, 15.926148314142917],
        [16.437778841912284, 13.22706433781524],
        [17.54325108407331, 6.866351455472475],
        [13.2829099210058, 10.197002225022363],
        [2.927901162914739, 18.129697664784665],
    ]
)

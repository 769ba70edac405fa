"""Executable CAT(kappa) comparison geometry: model triangles, four-point
tests, flag and cubical complexes, puff pastries and convex billiards."""

from .billiards import (BilliardTable, HardBallSystem, collision_bound, corner_width_compact,
                        hard_ball_to_billiard, simulate, simulate_hard_balls, wedge_reflection_count)
from .bodies import Ball, Cylinder, HalfSpace, Polytope, body_from_dict
from .cat4 import (CatVerdict, Quadruple, cat_quadruple, cat_quadruple_all_splittings, classify_four_point,
                   thin_triangle_test)
from .complexes import (CubicalComplex, SimplicialComplex, all_right_cat1_verdict, barycentric_subdivision,
                        bhv_link_complex, cubical_analog, cubical_vertex_link, is_flag, link,
                        no_triangle_condition)
from .metric import (FiniteMetricSpace, ModelConfig, alexandrov_lemma, angle_curvature_gap,
                     gh_distance_bruteforce, model_angle, model_triangle, validate_metric)
from .pastry import (LiftedPoint, PuffPastry, build_bfk_array, end_to_end_convex_check, pastry_distance,
                     zigzag_length_check)

__version__ = "0.1.0"

"""Numerical verification engine for prescribed-angle hypersurfaces
associated with torse-forming vector fields.

The package is organized bottom-up:

``jets``      exact first/second derivatives (forward jets) + FD oracle
``exprs``     the scene expression language
``charts``    ambient metric, Christoffels, curvature tensor
``surfaces``  immersions, shape operator, principal curvatures
``fields``    torse-forming classification of a field along a surface
``angles``    angle decomposition, adapted frame, structural identities
``families``  closed-form profiles of the constant-curvature theorems
``scenes``    JSON scene schema
``gallery``   built-in worked examples with expectations
``verify``    end-to-end verification runs, reports and CSV export
"""

from .charts import (AmbientVector, ChartDomain, DomainError, GeometryError,
                     MetricChart, euclidean_chart, half_space_chart,
                     sphere_stereographic_chart)
from .exprs import ExprError, compile_field, eval_jet, parse, print_expr
from .families import (AdmissibilityError, FitResult, PoleError,
                       SolutionFamily, b_family_residual, family_eval,
                       family_fit, family_values, ode_oracle, ode_residual,
                       oracle_vs_family, s_form_check, totally_geodesic_theta)
from .fields import (FieldAlongSurface, FieldError, TorseFit,
                     concircular_umbilical_check, torse_fit,
                     umbilical_normal_is_antitorqued_check,
                     unit_torse_implies_antitorqued_check)
from .angles import (AdaptedChart, PADecomposition, PAPoint, adapted_chart,
                     analyze_grid, angle_function, dercomp_residuals,
                     pa_curvatures, parallel_V_theorem_check,
                     plevi_frame_check, principal_direction_test,
                     theta_extremes_check, umbilic_parallel_relations)
from .jets import (FDEstimate, Jet1, Jet2, JetDomainError, ScalarField,
                   fd_oracle, jet_eval)
from .scenes import (CompiledScene, Scene, SceneError, compile_scene,
                     load_scene, scene_from_dict)
from .gallery import Expectation, GalleryCase, gallery, gallery_case
from .surfaces import (Immersion, PointGeometry, RuledReport, SurfaceGeometry,
                       UmbilicityReport, brioschi_intrinsic,
                       classify_umbilicity, gauss_formula_check, param_grid,
                       ruled_check, surface_geometry, three_curvatures)
from .verify import (EXPORT_QUANTITIES, Bundle, compute_bundle, export_csv,
                     report_to_json, run_verify)

__version__ = "0.1.0"

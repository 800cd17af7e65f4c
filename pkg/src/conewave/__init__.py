"""Boundary-integral time-domain wave scattering with moving obstacles.

Surface-only marching-on-time solvers for the exterior Dirichlet problem
of the variable-speed wave equation, built on slab-frozen retarded
layer-potential weights and ray-based travel-time closures.
"""

from .assembly import QuadratureRule, WeightAssembler, WeightBlock, assemble_block, gauss_rule, p1_shape
from .errors import (ConewaveError, ConfigError, DomainError, GeometryError, NumericalError,
                     PhysicsError, ResourceLimitError, SubsonicError)
from .geometry import (InterfaceMotion, MeshFrame, SurfaceMesh, circle_mesh_2d, frame_at,
                       icosphere_mesh, load_off, subsonic_audit, turbine_boundary_2d)
from .kernel import (KernelSample, SlabContext, amplitude, causal_mask_3d, dl_weights_2d,
                     dl_weights_3d, jump_lambda, sl_weights_2d, sl_weights_3d)
from .medium import SpeedField
from .mot import DensityHistory, Scenario, Stabilizer, march, rynne_average, surface_smooth
from .scatter import (IncidentWave, ReflectionEvents, SensorSpec, boundary_data, evaluate_field,
                      incident, reflected_arrival, reflection_source_times, sensor_history)
from .traveltime import (RadialRayTable, RayPolyline, TravelTimeModel, arrival_time, eta,
                         eta_dtau_total, eta_normal_derivative, refine_ray)

__version__ = "0.1.0"

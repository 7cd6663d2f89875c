"""
Analysis module exports
"""

from .msf_maps import AfMfMap, time_average_msf, f_ratio, f_ratio_against_reference
from .spectral_density import energy_spectral_density
from .gradcam import GradCamMap, grad_cam, upsample_bilinear
from .filter_responses import filterbank_response, scale_center_frequencies
from .export import write_grid_csv, write_curve_csv

__all__ = [
    "AfMfMap",
    "time_average_msf",
    "f_ratio",
    "f_ratio_against_reference",
    "energy_spectral_density",
    "GradCamMap",
    "grad_cam",
    "upsample_bilinear",
    "filterbank_response",
    "scale_center_frequencies",
    "write_grid_csv",
    "write_curve_csv",
]

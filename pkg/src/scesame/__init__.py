"""Zero-shot edge detection from segmentation-mask ensembles.

Pipeline: box NMS -> top-mask selection -> spectral-clustering mask
merge -> boundary edge responses -> normalize -> boundary zero padding
-> blur -> directional NMS, plus a BSDS-style ODS/OIS/AP evaluator.
"""

from ._kernels import backend_name
from .affinity import (AffinityMatrix, AffinityParams, knn_affinity,
                       local_scales, overlap_ratio, scesame_affinity)
from .edges import (EdgeConfig, ScConfig, aggregate_normalize,
                    boundary_zero_padding, detect_edges, edge_nms,
                    gaussian_blur, mask_boundary, mask_edge_response)
from .ensemble import EnsembleMask, cluster_count, merge_clusters
from .errors import (DataError, EmptyMaskError, InvalidAffinityError,
                     MalformedInputError, NumericError, ParameterError,
                     ScesameError, ShapeError, TooFewMasksError)
from .evaluation import (GroundTruth, MetricsReport, PrPoint,
                         average_precision, correspond_pixels,
                         evaluate_dataset, ods_ois, prf_at_threshold)
from .fixtures import CirclesDataset, gen_circles, gen_synthetic_scene
from .masks import (RLE, MaskRecord, MaskSet, box_iou, box_nms,
                    load_mask_file, mask_geometry, rle_decode, rle_encode,
                    save_mask_file)
from .spectral import (ClusterAssignment, GraphLaplacian, SpectralEmbedding,
                       build_laplacian, kmeans, spectral_cluster,
                       spectral_embedding)
from .tms import TmsConfig, top_mask_selection

__version__ = "0.1.0"

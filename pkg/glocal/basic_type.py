from typing import Sequence

import numpy as np
import scipy.sparse as sp


# Basic Types
Vector = np.ndarray
DenseMatrix = np.ndarray
SparseMatrix = sp.csr_matrix
IndexArray = np.ndarray
Coordinates = np.ndarray | Sequence[Sequence[float]]

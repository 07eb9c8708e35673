// Umbrella header.

#pragma once

#include "qdes/artifacts.hpp"
#include "qdes/chebyshev.hpp"
#include "qdes/circuit.hpp"
#include "qdes/encoding.hpp"
#include "qdes/fourier.hpp"
#include "qdes/linalg.hpp"
#include "qdes/lse.hpp"
#include "qdes/mixture.hpp"
#include "qdes/model.hpp"
#include "qdes/multiplier.hpp"
#include "qdes/problem.hpp"
#include "qdes/statevector.hpp"
#include "qdes/training.hpp"

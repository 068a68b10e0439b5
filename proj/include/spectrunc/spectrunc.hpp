#pragma once

#include "spectrunc/diagnostics.hpp"
#include "spectrunc/error.hpp"
#include "spectrunc/experiments.hpp"
#include "spectrunc/fejer.hpp"
#include "spectrunc/io.hpp"
#include "spectrunc/kernels.hpp"
#include "spectrunc/parallel.hpp"
#include "spectrunc/regression.hpp"
#include "spectrunc/torus.hpp"
#include "spectrunc/truncation.hpp"

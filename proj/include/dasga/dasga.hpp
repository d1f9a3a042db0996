#pragma once

#include "dasga/graph.hpp"
#include "dasga/spectral.hpp"
#include "dasga/sqp.hpp"
#include "dasga/align.hpp"
#include "dasga/baselines.hpp"
#include "dasga/data.hpp"

#pragma once

#include "automine/common.hpp"
#include "automine/dataset.hpp"
#include "automine/profile.hpp"
#include "automine/ranking.hpp"
#include "automine/clustering.hpp"
#include "automine/detection.hpp"
#include "automine/viz.hpp"
#include "automine/pipeline.hpp"

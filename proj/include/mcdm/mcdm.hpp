#pragma once

// Everything except the HTTP pieces (remote_provider.hpp, service.hpp, cli.hpp).
#include "mcdm/ahp.hpp"
#include "mcdm/catalog.hpp"
#include "mcdm/errors.hpp"
#include "mcdm/experiment.hpp"
#include "mcdm/matrix_file.hpp"
#include "mcdm/pipeline.hpp"
#include "mcdm/scoring.hpp"
#include "mcdm/text.hpp"

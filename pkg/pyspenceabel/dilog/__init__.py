"""Rogers' dilogarithm: orientation cocycle, closed forms, reference series and the integral formula."""

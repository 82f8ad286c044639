RUN_NOT_FOUND = "Run not found"
DATABASE_NOT_CONFIGURED = "Database is not configured correctly"
DATABASE_CONNECTION_ERROR = "Error connecting to the database"
WORK_LIMIT_EXCEEDED = "Requested work exceeds the HTTP limit, use the CLI for large runs"
NOT_ADMISSIBLE = "Parameter tuple is not admissible"
EXPLORATORY_RUN = "Regime check failed at the weak level: results are exploratory"
CRITICAL_SMALLNESS = "smallness condition on F required"
CRITICAL_WEAK_NOTE = "weak uniqueness does not require the smallness condition (localisation)"
NO_TABLE_FOR_CLASS = "No boundary table for the {example_class} class"
H_DATA_UNBOUNDED_DRIFT = "Initial data in H requires a bounded drift (select bounded_holder instead of power_holder)"
KOLMOGOROV_UNBOUNDED_DRIFT = "The Kolmogorov fixed point requires a bounded drift"

import pandas as pd

TRIAL_COLUMNS = ['n', 'seed', 'ffd', 'solving_degree', 'matrix_max_dims', 'wall_time_ms', 'status']

def format_trials_dataframe(df: pd.DataFrame) -> pd.DataFrame:
    """
    Applies the CSV column order, integer types and rounding to a trials DataFrame.

    Degrees become nullable integers so missing values export as empty cells;
    wall times are rounded to 0.1 ms. Rows are sorted by n, then seed.

    Args:
        df: The DataFrame to format.

    Returns:
        The formatted DataFrame with exactly the CSV columns.
    """
    if df.empty:
        return pd.DataFrame(columns=TRIAL_COLUMNS)

    formatted_df = df.copy()
    for col in ['n', 'seed']:
        formatted_df[col] = formatted_df[col].astype('int64')
    for col in ['ffd', 'solving_degree']:
        formatted_df[col] = pd.to_numeric(formatted_df[col], errors='coerce').round(0).astype('Int64')
    if 'wall_time_ms' not in formatted_df.columns:
        formatted_df['wall_time_ms'] = None
    formatted_df['wall_time_ms'] = pd.to_numeric(formatted_df['wall_time_ms'], errors='coerce').round(1)
    formatted_df = formatted_df.sort_values(['n', 'seed'], kind='stable').reset_index(drop=True)
    return formatted_df[TRIAL_COLUMNS]

import pandas as pd

def calculate_ffd_rate(df: pd.DataFrame) -> pd.DataFrame:
    """
    Calculates, per extension degree n, how many trials showed a first fall degree of 2.

    Args:
        df: Trial rows with at least the columns 'n' and 'ffd'.

    Returns:
        A DataFrame with columns 'n', 'trials', 'ffd_2' and 'ffd_rate', sorted by n.
    """
    if df.empty:
        return pd.DataFrame(columns=['n', 'trials', 'ffd_2', 'ffd_rate'])

    is_two = pd.to_numeric(df['ffd'], errors='coerce').eq(2)
    grouped = is_two.groupby(df['n'])
    rates_df = pd.DataFrame({
        'trials': grouped.size(),
        'ffd_2': grouped.sum().astype(int),
    })
    rates_df['ffd_rate'] = rates_df['ffd_2'] / rates_df['trials']
    rates_df.index.name = 'n'
    return rates_df.reset_index()

def calculate_solving_degree_distribution(df: pd.DataFrame) -> pd.DataFrame:
    """
    Calculates the distribution of observed solving degrees for each n.

    Unresolved and capped trials have no solving degree and are counted under a
    missing value, listed after the resolved degrees.

    Args:
        df: Trial rows with at least the columns 'n' and 'solving_degree'.

    Returns:
        A DataFrame with columns 'n', 'solving_degree', 'count' and 'fraction'.
    """
    if df.empty:
        return pd.DataFrame(columns=['n', 'solving_degree', 'count', 'fraction'])

    degrees = pd.DataFrame({
        'n': df['n'],
        'solving_degree': pd.to_numeric(df['solving_degree'], errors='coerce').astype('Int64'),
    })
    counts = degrees.groupby(['n', 'solving_degree'], dropna=False).size().reset_index(name='count')
    counts['fraction'] = counts['count'] / counts.groupby('n')['count'].transform('sum')
    return counts

def calculate_status_counts(df: pd.DataFrame) -> pd.DataFrame:
    """
    Counts resolved, unresolved and capped trials for each n.
    """
    if df.empty:
        return pd.DataFrame(columns=['n', 'status', 'count'])

    return df.groupby(['n', 'status']).size().reset_index(name='count')

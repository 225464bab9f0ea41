public class Main {
    // TODO: tidy up
    static int solve(int n, int x) {
        if (x == 0) {
            return n;
        }
        return solve(x, n % x);
    }

    public static void main(String[] args) {
        System.out.printf("%s%n", solve(241, 171));
    }
}

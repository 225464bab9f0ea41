public class Task {
    // TODO: tidy up
    static long go(int x) {
        long n = 1;
        for (int k = 2; k <= x; k++) {
            n *= k;
        }
        return n;
    }

    public static void main(String[] args) {
        System.out.printf("%s%n", go(7));
    }
}

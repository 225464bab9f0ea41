public class Task {
    // TODO: tidy up
    static long process(int n) {
        return n <= 1 ? 1 : n * process(n - 1);
    }

    public static void main(String[] args) {
        for (int idx = 1; idx <= 4; idx++) {
            System.out.printf("%s%n", process(idx));
        }
    }
}
